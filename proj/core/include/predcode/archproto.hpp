#pragma once

// Architecture graphs for convolutional predictive-coding networks:
// trainable-parameter accounting, channel bookkeeping and the check that
// representation (R) and error (E) modules only talk to each other in the
// directions the protocol allows.
//
// Links carry one of four protocol kinds between R and E modules:
//   P   prediction         R -> E, top-down
//   PE  prediction error   E -> R, bottom-up
//   LT  lateral target     R -> E
//   LTE lateral target err E -> R
// or `other`, whose direction is read off its resize (pool = up,
// upsample = down). A and Ahat modules are adapters: they hold weights but
// protocol rules are evaluated on the R/E endpoints they connect.

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace predcode::arch {

enum class ModuleKind { R, E, A, Ahat, Input };
enum class LinkKind { P, PE, LT, LTE, other };
enum class Resize { none, pool, upsample };
enum class Cell { lstm, gru };

std::string_view to_string(ModuleKind k);
std::string_view to_string(LinkKind k);
std::string_view to_string(Resize r);
std::string_view to_string(Cell c);

struct ArchModule {
  std::string name;
  ModuleKind kind = ModuleKind::R;
  std::uint64_t conv_sets = 1;
  std::uint64_t kernel = 3;
  std::uint64_t in_channels = 0;
  std::uint64_t out_channels = 0;
};

struct ArchLink {
  std::string src;
  std::string dst;
  LinkKind kind = LinkKind::other;
  Resize resize = Resize::none;
};

struct Architecture {
  std::string name;
  std::vector<ArchModule> modules;
  std::vector<ArchLink> links;
  std::vector<std::uint64_t> stack_sizes;    // E-module input channels per layer
  std::vector<std::uint64_t> r_stack_sizes;  // R-module output channels per layer
  std::vector<double> loss_weights;          // metadata only

  const ArchModule* find(std::string_view name) const;
};

/// Malformed graphs: unknown endpoints, duplicate names, self links,
/// inconsistent channels or adapters that mix link kinds.
class ArchError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// File-format errors; `line()` is 1-based.
class ArchParseError : public std::invalid_argument {
 public:
  ArchParseError(std::size_t line, const std::string& what);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// cs * oc * (k² ic + 1); 0 for Input and E modules.
std::uint64_t module_params(const ArchModule& m);

std::uint64_t total_params(const Architecture& a);

struct ParamRow {
  std::string module;
  std::uint64_t conv_sets = 0;
  std::uint64_t kernel = 0;
  std::uint64_t in_channels = 0;
  std::uint64_t out_channels = 0;
  std::uint64_t params = 0;
};

/// One row per module with trainable weights, in module order.
std::vector<ParamRow> param_table(const Architecture& a);

/// Aligned text rendering of param_table plus the total.
std::string format_param_table(const Architecture& a);

// ---- presets ----------------------------------------------------------------

enum class Family { rbp, lotter, hybrid };

/// Deterministic construction from per-layer channel lists. Module order per
/// layer l: A_l (l >= 1), Ahat_l, R_l, E_l; `Input` comes first.
/// Throws ArchError on empty or mismatched lists.
Architecture build_preset(Family family, const std::vector<std::uint64_t>& stack_sizes,
                          const std::vector<std::uint64_t>& r_stack_sizes, Cell cell = Cell::lstm);

/// Named presets: rbp3, rbp3-gru, lotter3, hybrid3 and the model IDs Pred1,
/// Pred2, RB1..RB7, RB3_gru, RB4_gru. Lookup ignores case; `-` and `_` are
/// interchangeable. Returns nullopt for unknown names.
std::optional<Architecture> preset(std::string_view name);

std::vector<std::string> preset_names();

// ---- file format ------------------------------------------------------------

/// Parses `module ...` / `link ...` lines plus optional `name`,
/// `stack_sizes`, `r_stack_sizes` and `loss_weights` lines; `#` starts a
/// comment. `name` in the file overrides the argument.
Architecture parse_architecture(std::istream& in, std::string name = "file");
Architecture parse_architecture_string(std::string_view text, std::string name = "file");

void write_architecture(std::ostream& out, const Architecture& a);
std::string architecture_to_string(const Architecture& a);

// ---- channel bookkeeping ----------------------------------------------------

struct LinkRow {
  std::string src;
  std::string dst;
  LinkKind kind = LinkKind::other;
  std::uint64_t channels = 0;
  Resize resize = Resize::none;
  int src_level = 0;  // spatial scale level: +1 per pool, -1 per upsample
  int dst_level = 0;
};

/// Every link with its resolved channel count (the source's oc). Checks that
/// adapter and R inputs sum to ic (R modules also receive their own oc
/// recurrently), that every E input carries ic channels with oc = 2 ic, and
/// that spatial levels are consistent. Throws ArchError naming the offender.
std::vector<LinkRow> link_table(const Architecture& a);

// ---- protocol ---------------------------------------------------------------

enum class Rule {
  rr_feedback,        // R -> R
  ee_feedforward,     // E -> E
  upward_r,           // R projecting upward outside LT/P
  downward_e,         // E projecting downward outside PE/LTE
  kind_mismatch,      // protocol kind used between the wrong endpoint types
};

std::string_view rule_name(Rule r);

struct Violation {
  Rule rule;
  std::string src;    // R/E endpoint
  std::string dst;    // R/E endpoint
  std::string via;    // adapters traversed, comma separated (may be empty)
};

struct ProtocolReport {
  bool pass = true;
  std::vector<Violation> violations;

  /// Distinct rules in first-seen order.
  std::vector<Rule> classes() const;
};

/// Collapses adapter chains into endpoint-to-endpoint links and checks each.
/// Throws ArchError when the graph is malformed.
ProtocolReport validate_rb_protocol(const Architecture& a);

std::string format_report(const ProtocolReport& r);

}  // namespace predcode::arch
