#include "predcode/archproto.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <functional>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

namespace predcode::arch {

std::string_view to_string(ModuleKind k) {
  switch (k) {
    case ModuleKind::R: return "R";
    case ModuleKind::E: return "E";
    case ModuleKind::A: return "A";
    case ModuleKind::Ahat: return "Ahat";
    case ModuleKind::Input: return "Input";
  }
  return "?";
}

std::string_view to_string(LinkKind k) {
  switch (k) {
    case LinkKind::P: return "P";
    case LinkKind::PE: return "PE";
    case LinkKind::LT: return "LT";
    case LinkKind::LTE: return "LTE";
    case LinkKind::other: return "other";
  }
  return "?";
}

std::string_view to_string(Resize r) {
  switch (r) {
    case Resize::none: return "none";
    case Resize::pool: return "pool";
    case Resize::upsample: return "upsample";
  }
  return "?";
}

std::string_view to_string(Cell c) { return c == Cell::lstm ? "lstm" : "gru"; }

const ArchModule* Architecture::find(std::string_view name) const {
  for (const auto& m : modules)
    if (m.name == name) return &m;
  return nullptr;
}

ArchParseError::ArchParseError(std::size_t line, const std::string& what)
    : std::invalid_argument("line " + std::to_string(line) + ": " + what), line_(line) {}

std::uint64_t module_params(const ArchModule& m) {
  if (m.kind == ModuleKind::Input || m.kind == ModuleKind::E) return 0;
  return m.conv_sets * m.out_channels * (m.kernel * m.kernel * m.in_channels + 1);
}

std::uint64_t total_params(const Architecture& a) {
  std::uint64_t total = 0;
  for (const auto& m : a.modules) total += module_params(m);
  return total;
}

std::vector<ParamRow> param_table(const Architecture& a) {
  std::vector<ParamRow> rows;
  for (const auto& m : a.modules) {
    if (m.kind == ModuleKind::Input || m.kind == ModuleKind::E) continue;
    rows.push_back({m.name, m.conv_sets, m.kernel, m.in_channels, m.out_channels, module_params(m)});
  }
  return rows;
}

namespace {

std::string with_commas(std::uint64_t v) {
  std::string digits = std::to_string(v);
  std::string out;
  for (std::size_t i = 0; i < digits.size(); ++i) {
    if (i > 0 && (digits.size() - i) % 3 == 0) out += ',';
    out += digits[i];
  }
  return out;
}

}  // namespace

std::string format_param_table(const Architecture& a) {
  std::ostringstream os;
  os << std::left << std::setw(8) << "module" << std::right << std::setw(4) << "cs" << std::setw(7)
     << "k^2" << std::setw(6) << "ic" << std::setw(6) << "oc" << "  " << std::left << std::setw(24)
     << "cs*oc*(k^2*ic+1)" << std::right << std::setw(10) << "params" << '\n';
  for (const auto& r : param_table(a)) {
    const std::string kk = std::to_string(r.kernel) + "x" + std::to_string(r.kernel);
    const std::string calc = std::to_string(r.conv_sets) + "*" + std::to_string(r.out_channels) +
                             "*(" + std::to_string(r.kernel * r.kernel) + "*" +
                             std::to_string(r.in_channels) + "+1)";
    os << std::left << std::setw(8) << r.module << std::right << std::setw(4) << r.conv_sets
       << std::setw(7) << kk << std::setw(6) << r.in_channels << std::setw(6) << r.out_channels
       << "  " << std::left << std::setw(24) << calc << std::right << std::setw(10)
       << with_commas(r.params) << '\n';
  }
  os << "Total parameters: " << with_commas(total_params(a)) << '\n';
  return os.str();
}

// ---- presets ----------------------------------------------------------------

Architecture build_preset(Family family, const std::vector<std::uint64_t>& stack,
                          const std::vector<std::uint64_t>& r_stack, Cell cell) {
  if (stack.empty()) throw ArchError("build_preset: stack_sizes is empty");
  if (stack.size() != r_stack.size()) {
    throw ArchError("build_preset: stack_sizes has " + std::to_string(stack.size()) +
                    " entries but r_stack_sizes has " + std::to_string(r_stack.size()));
  }
  for (std::size_t l = 0; l < stack.size(); ++l) {
    if (stack[l] == 0 || r_stack[l] == 0) throw ArchError("build_preset: zero channel count");
  }
  const std::size_t L = stack.size();
  const std::uint64_t r_sets = cell == Cell::lstm ? 4 : 3;
  auto idx = [](const char* base, std::size_t l) { return std::string(base) + std::to_string(l); };

  Architecture a;
  a.stack_sizes = stack;
  a.r_stack_sizes = r_stack;
  a.modules.push_back({"Input", ModuleKind::Input, 1, 1, 0, stack[0]});
  a.links.push_back({"Input", "E0", LinkKind::LT, Resize::none});

  for (std::size_t l = 0; l < L; ++l) {
    const bool above = l + 1 < L;
    if (l >= 1) {
      const std::uint64_t ic = family == Family::lotter ? 2 * stack[l - 1] : r_stack[l - 1];
      a.modules.push_back({idx("A", l), ModuleKind::A, 1, 3, ic, stack[l]});
    }
    a.modules.push_back({idx("Ahat", l), ModuleKind::Ahat, 1, 3, r_stack[l], stack[l]});

    std::uint64_t r_ic = r_stack[l] + 2 * stack[l];
    if (above) {
      if (family == Family::rbp) r_ic += 2 * stack[l + 1];
      if (family == Family::lotter) r_ic += r_stack[l + 1];
      if (family == Family::hybrid) r_ic += 2 * stack[l + 1] + r_stack[l + 1];
    }
    a.modules.push_back({idx("R", l), ModuleKind::R, r_sets, 3, r_ic, r_stack[l]});
    a.modules.push_back({idx("E", l), ModuleKind::E, 1, 3, stack[l], 2 * stack[l]});

    a.links.push_back({idx("R", l), idx("Ahat", l), LinkKind::P, Resize::none});
    a.links.push_back({idx("Ahat", l), idx("E", l), LinkKind::P, Resize::none});
    a.links.push_back({idx("E", l), idx("R", l), LinkKind::PE, Resize::none});
    if (l >= 1) {
      if (family == Family::lotter) {
        a.links.push_back({idx("E", l - 1), idx("A", l), LinkKind::other, Resize::pool});
        a.links.push_back({idx("A", l), idx("E", l), LinkKind::other, Resize::none});
      } else {
        a.links.push_back({idx("R", l - 1), idx("A", l), LinkKind::LT, Resize::pool});
        a.links.push_back({idx("A", l), idx("E", l), LinkKind::LT, Resize::none});
        a.links.push_back({idx("E", l), idx("R", l - 1), LinkKind::LTE, Resize::upsample});
      }
      if (family != Family::rbp) {
        a.links.push_back({idx("R", l), idx("R", l - 1), LinkKind::other, Resize::upsample});
      }
    }
  }
  return a;
}

namespace {

struct PresetSpec {
  const char* name;
  Family family;
  Cell cell;
  std::vector<std::uint64_t> stack;
  std::vector<std::uint64_t> r_stack;
  std::vector<double> loss;
};

const std::vector<PresetSpec>& preset_specs() {
  static const std::vector<PresetSpec> specs = {
      {"rbp3", Family::rbp, Cell::lstm, {3, 3, 12}, {3, 12, 24}, {.5, .4, .2}},
      {"rbp3-gru", Family::rbp, Cell::gru, {3, 3, 12}, {3, 12, 24}, {.5, .4, .2}},
      {"lotter3", Family::lotter, Cell::lstm, {3, 12, 24}, {3, 12, 24}, {.5, .4, .2}},
      {"hybrid3", Family::hybrid, Cell::lstm, {3, 3, 12}, {3, 12, 24}, {.5, .4, .2}},
      {"Pred1", Family::lotter, Cell::lstm, {3, 12, 24}, {3, 12, 24}, {.5, .4, .2}},
      {"Pred2", Family::lotter, Cell::lstm, {3, 12, 24}, {3, 12, 24}, {1, 0, 0}},
      {"RB1", Family::rbp, Cell::lstm, {3, 3, 12}, {3, 12, 24}, {.5, .4, .2}},
      {"RB2", Family::rbp, Cell::lstm, {3, 3, 12}, {3, 12, 24}, {1, 0, 0}},
      {"RB3", Family::rbp, Cell::lstm, {3, 12, 24}, {10, 16, 30}, {1, 0, 0}},
      {"RB3_gru", Family::rbp, Cell::gru, {3, 12, 24}, {10, 16, 30}, {.5, .4, .2}},
      {"RB4_gru", Family::rbp, Cell::gru, {3, 12, 24}, {10, 16, 30}, {1, 0, 0}},
      {"RB5", Family::rbp, Cell::lstm, {3, 3, 12}, {3, 12, 24}, {.33, .33, .33}},
      {"RB6", Family::rbp, Cell::lstm, {3, 3}, {3, 12}, {1, 0}},
      {"RB7", Family::rbp, Cell::lstm, {3, 3}, {3, 12}, {.5, .5}},
  };
  return specs;
}

std::string normalize(std::string_view s) {
  std::string out;
  for (char c : s) out += c == '_' ? '-' : static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

std::optional<Architecture> preset(std::string_view name) {
  const std::string key = normalize(name);
  for (const auto& p : preset_specs()) {
    if (normalize(p.name) != key) continue;
    Architecture a = build_preset(p.family, p.stack, p.r_stack, p.cell);
    a.name = p.name;
    a.loss_weights = p.loss;
    return a;
  }
  return std::nullopt;
}

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& p : preset_specs()) names.emplace_back(p.name);
  return names;
}

// ---- file format ------------------------------------------------------------

namespace {

std::vector<std::string> tokens(const std::string& line) {
  std::istringstream is(line);
  std::vector<std::string> out;
  for (std::string t; is >> t;) out.push_back(t);
  return out;
}

std::uint64_t parse_count(std::size_t line, std::string_view key, std::string_view v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ArchParseError(line, "'" + std::string(key) + "' expects a non-negative integer, got '" +
                                   std::string(v) + "'");
  }
  return out;
}

ModuleKind parse_module_kind(std::size_t line, std::string_view v) {
  for (auto k : {ModuleKind::R, ModuleKind::E, ModuleKind::A, ModuleKind::Ahat, ModuleKind::Input})
    if (to_string(k) == v) return k;
  throw ArchParseError(line, "unknown module kind '" + std::string(v) + "'");
}

LinkKind parse_link_kind(std::size_t line, std::string_view v) {
  for (auto k : {LinkKind::P, LinkKind::PE, LinkKind::LT, LinkKind::LTE, LinkKind::other})
    if (to_string(k) == v) return k;
  throw ArchParseError(line, "unknown link kind '" + std::string(v) + "'");
}

Resize parse_resize(std::size_t line, std::string_view v) {
  for (auto r : {Resize::none, Resize::pool, Resize::upsample})
    if (to_string(r) == v) return r;
  throw ArchParseError(line, "unknown resize '" + std::string(v) + "'");
}

std::map<std::string, std::string> key_values(std::size_t line, const std::vector<std::string>& t,
                                              std::size_t from) {
  std::map<std::string, std::string> kv;
  for (std::size_t i = from; i < t.size(); ++i) {
    const auto eq = t[i].find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ArchParseError(line, "expected key=value, got '" + t[i] + "'");
    }
    const std::string key = t[i].substr(0, eq);
    if (!kv.emplace(key, t[i].substr(eq + 1)).second) {
      throw ArchParseError(line, "duplicate key '" + key + "'");
    }
  }
  return kv;
}

}  // namespace

Architecture parse_architecture(std::istream& in, std::string name) {
  Architecture a;
  a.name = std::move(name);
  std::map<std::string, std::size_t> module_line;
  std::vector<std::size_t> link_lines;
  std::string raw;
  for (std::size_t line = 1; std::getline(in, raw); ++line) {
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    const auto t = tokens(raw);
    if (t.empty()) continue;
    if (t[0] == "module") {
      if (t.size() < 2) throw ArchParseError(line, "module needs a name");
      auto kv = key_values(line, t, 2);
      ArchModule m;
      m.name = t[1];
      auto take = [&](const char* key) {
        auto it = kv.find(key);
        if (it == kv.end()) throw ArchParseError(line, "module '" + m.name + "' is missing " + key);
        std::string v = it->second;
        kv.erase(it);
        return v;
      };
      m.kind = parse_module_kind(line, take("kind"));
      m.conv_sets = parse_count(line, "cs", take("cs"));
      m.kernel = parse_count(line, "k", take("k"));
      m.in_channels = parse_count(line, "ic", take("ic"));
      m.out_channels = parse_count(line, "oc", take("oc"));
      if (!kv.empty()) throw ArchParseError(line, "unknown module key '" + kv.begin()->first + "'");
      if (!module_line.emplace(m.name, line).second) {
        throw ArchParseError(line, "duplicate module '" + m.name + "'");
      }
      a.modules.push_back(std::move(m));
    } else if (t[0] == "link") {
      if (t.size() < 4 || t[2] != "->") throw ArchParseError(line, "expected 'link <src> -> <dst> ...'");
      auto kv = key_values(line, t, 4);
      ArchLink l{t[1], t[3], LinkKind::other, Resize::none};
      if (auto it = kv.find("kind"); it != kv.end()) {
        l.kind = parse_link_kind(line, it->second);
        kv.erase(it);
      } else {
        throw ArchParseError(line, "link is missing kind");
      }
      if (auto it = kv.find("resize"); it != kv.end()) {
        l.resize = parse_resize(line, it->second);
        kv.erase(it);
      }
      if (!kv.empty()) throw ArchParseError(line, "unknown link key '" + kv.begin()->first + "'");
      a.links.push_back(std::move(l));
      link_lines.push_back(line);
    } else if (t[0] == "name") {
      if (t.size() != 2) throw ArchParseError(line, "name takes exactly one identifier");
      a.name = t[1];
    } else if (t[0] == "stack_sizes" || t[0] == "r_stack_sizes") {
      auto& dst = t[0] == "stack_sizes" ? a.stack_sizes : a.r_stack_sizes;
      for (std::size_t i = 1; i < t.size(); ++i) dst.push_back(parse_count(line, t[0], t[i]));
    } else if (t[0] == "loss_weights") {
      for (std::size_t i = 1; i < t.size(); ++i) {
        try {
          std::size_t used = 0;
          a.loss_weights.push_back(std::stod(t[i], &used));
          if (used != t[i].size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
          throw ArchParseError(line, "loss_weights expects numbers, got '" + t[i] + "'");
        }
      }
    } else {
      throw ArchParseError(line, "unknown directive '" + t[0] + "'");
    }
  }
  for (std::size_t i = 0; i < a.links.size(); ++i) {
    const auto& l = a.links[i];
    for (const auto* end : {&l.src, &l.dst}) {
      if (!module_line.count(*end)) {
        throw ArchParseError(link_lines[i], "link endpoint '" + *end + "' is not a declared module");
      }
    }
    if (l.src == l.dst) throw ArchParseError(link_lines[i], "self link on '" + l.src + "'");
  }
  return a;
}

Architecture parse_architecture_string(std::string_view text, std::string name) {
  std::istringstream is{std::string(text)};
  return parse_architecture(is, std::move(name));
}

void write_architecture(std::ostream& out, const Architecture& a) {
  if (!a.name.empty()) out << "name " << a.name << '\n';
  auto list = [&](const char* key, const auto& v) {
    if (v.empty()) return;
    out << key;
    for (const auto& x : v) out << ' ' << x;
    out << '\n';
  };
  list("stack_sizes", a.stack_sizes);
  list("r_stack_sizes", a.r_stack_sizes);
  list("loss_weights", a.loss_weights);
  for (const auto& m : a.modules) {
    out << "module " << m.name << " kind=" << to_string(m.kind) << " cs=" << m.conv_sets
        << " k=" << m.kernel << " ic=" << m.in_channels << " oc=" << m.out_channels << '\n';
  }
  for (const auto& l : a.links) {
    out << "link " << l.src << " -> " << l.dst << " kind=" << to_string(l.kind)
        << " resize=" << to_string(l.resize) << '\n';
  }
}

std::string architecture_to_string(const Architecture& a) {
  std::ostringstream os;
  write_architecture(os, a);
  return os.str();
}

// ---- structural checks ------------------------------------------------------

namespace {

const ArchModule& require_module(const Architecture& a, const std::string& name) {
  const ArchModule* m = a.find(name);
  if (!m) throw ArchError("link endpoint '" + name + "' is not a module");
  return *m;
}

void check_graph(const Architecture& a) {
  std::set<std::string> names;
  for (const auto& m : a.modules) {
    if (!names.insert(m.name).second) throw ArchError("duplicate module '" + m.name + "'");
    if (m.kind != ModuleKind::Input && m.kind != ModuleKind::E) {
      if (m.conv_sets != 1 && m.conv_sets != 3 && m.conv_sets != 4) {
        throw ArchError("module '" + m.name + "': conv_sets must be 1, 3 or 4");
      }
    }
    if (m.kind == ModuleKind::E && m.out_channels != 2 * m.in_channels) {
      throw ArchError("E module '" + m.name + "' must have oc = 2*ic (got ic=" +
                      std::to_string(m.in_channels) + ", oc=" + std::to_string(m.out_channels) + ")");
    }
  }
  for (const auto& l : a.links) {
    require_module(a, l.src);
    const ArchModule& dst = require_module(a, l.dst);
    if (l.src == l.dst) throw ArchError("self link on '" + l.src + "'");
    if (dst.kind == ModuleKind::Input) throw ArchError("link " + l.src + " -> " + l.dst + " enters an Input");
  }
}

int resize_delta(Resize r) { return r == Resize::pool ? 1 : r == Resize::upsample ? -1 : 0; }

bool is_adapter(ModuleKind k) { return k == ModuleKind::A || k == ModuleKind::Ahat; }

}  // namespace

std::vector<LinkRow> link_table(const Architecture& a) {
  check_graph(a);
  std::vector<LinkRow> rows;
  if (a.modules.empty()) return rows;

  // Spatial levels by propagation over links in either direction.
  std::map<std::string, int> level;
  for (const auto& seed : a.modules) {
    if (level.count(seed.name)) continue;
    level[seed.name] = 0;
    bool changed = true;
    while (changed) {
      changed = false;
      for (const auto& l : a.links) {
        const int d = resize_delta(l.resize);
        const bool hs = level.count(l.src), hd = level.count(l.dst);
        if (hs && hd) {
          if (level[l.dst] != level[l.src] + d) {
            throw ArchError("link " + l.src + " -> " + l.dst + ": spatial level " +
                            std::to_string(level[l.src]) + " + " + std::string(to_string(l.resize)) +
                            " does not reach level " + std::to_string(level[l.dst]));
          }
        } else if (hs) {
          level[l.dst] = level[l.src] + d;
          changed = true;
        } else if (hd) {
          level[l.src] = level[l.dst] - d;
          changed = true;
        }
      }
    }
  }

  std::map<std::string, std::uint64_t> incoming;
  for (const auto& l : a.links) {
    const ArchModule& src = *a.find(l.src);
    const ArchModule& dst = *a.find(l.dst);
    rows.push_back({l.src, l.dst, l.kind, src.out_channels, l.resize, level[l.src], level[l.dst]});
    incoming[l.dst] += src.out_channels;
    if (dst.kind == ModuleKind::E && src.out_channels != dst.in_channels) {
      throw ArchError("link " + l.src + " -> " + l.dst + " carries " +
                      std::to_string(src.out_channels) + " channels but E module '" + dst.name +
                      "' compares " + std::to_string(dst.in_channels));
    }
  }
  for (const auto& m : a.modules) {
    std::uint64_t got = incoming[m.name];
    if (m.kind == ModuleKind::R) got += m.out_channels;
    if ((m.kind == ModuleKind::R || is_adapter(m.kind)) && got != m.in_channels) {
      throw ArchError("module '" + m.name + "' declares ic=" + std::to_string(m.in_channels) +
                      " but receives " + std::to_string(got) + " channels" +
                      (m.kind == ModuleKind::R ? " (including its own recurrent output)" : ""));
    }
  }
  return rows;
}

// ---- protocol ---------------------------------------------------------------

std::string_view rule_name(Rule r) {
  switch (r) {
    case Rule::rr_feedback: return "R→R feedback";
    case Rule::ee_feedforward: return "E→E feedforward";
    case Rule::upward_r: return "upward R projection";
    case Rule::downward_e: return "downward E projection";
    case Rule::kind_mismatch: return "link kind mismatch";
  }
  return "?";
}

std::vector<Rule> ProtocolReport::classes() const {
  std::vector<Rule> out;
  for (const auto& v : violations)
    if (std::find(out.begin(), out.end(), v.rule) == out.end()) out.push_back(v.rule);
  return out;
}

namespace {

struct Effective {
  std::string src;
  std::string dst;
  LinkKind kind;
  int delta;  // net spatial change
  std::string via;
};

enum class Dir { up, down, lateral };

Dir direction(const Effective& e) {
  switch (e.kind) {
    case LinkKind::P: return Dir::down;
    case LinkKind::PE: return Dir::up;
    case LinkKind::LT:
    case LinkKind::LTE: return Dir::lateral;
    case LinkKind::other: break;
  }
  return e.delta > 0 ? Dir::up : e.delta < 0 ? Dir::down : Dir::lateral;
}

// Follows adapter chains from every R/E/Input source to R/E endpoints.
std::vector<Effective> collapse(const Architecture& a) {
  std::vector<Effective> out;
  const std::size_t limit = a.modules.size();
  std::function<void(const ArchLink&, const std::string&, int, std::string, std::size_t)> walk =
      [&](const ArchLink& l, const std::string& origin, int delta, std::string via, std::size_t depth) {
        if (depth > limit) throw ArchError("adapter cycle through '" + l.dst + "'");
        const ArchModule& dst = *a.find(l.dst);
        delta += resize_delta(l.resize);
        if (!is_adapter(dst.kind)) {
          out.push_back({origin, l.dst, l.kind, delta, via});
          return;
        }
        if (!via.empty()) via += ',';
        via += dst.name;
        bool any = false;
        for (const auto& next : a.links) {
          if (next.src != dst.name) continue;
          any = true;
          if (next.kind != l.kind) {
            throw ArchError("adapter '" + dst.name + "' joins a " + std::string(to_string(l.kind)) +
                            " link to a " + std::string(to_string(next.kind)) + " link");
          }
          walk(next, origin, delta, via, depth + 1);
        }
        if (!any) throw ArchError("adapter '" + dst.name + "' has no outgoing link");
      };
  for (const auto& l : a.links) {
    if (is_adapter(a.find(l.src)->kind)) continue;
    walk(l, l.src, 0, "", 0);
  }
  return out;
}

}  // namespace

ProtocolReport validate_rb_protocol(const Architecture& a) {
  check_graph(a);
  ProtocolReport report;
  for (const Effective& e : collapse(a)) {
    const ModuleKind sk = a.find(e.src)->kind;
    const ModuleKind dk = a.find(e.dst)->kind;
    const bool src_rep = sk == ModuleKind::R || sk == ModuleKind::Input;
    const bool dst_rep = dk == ModuleKind::R;
    const Dir dir = direction(e);
    std::optional<Rule> rule;
    switch (e.kind) {
      case LinkKind::P:
      case LinkKind::LT:
        if (!src_rep || dst_rep) rule = Rule::kind_mismatch;
        break;
      case LinkKind::PE:
      case LinkKind::LTE:
        if (src_rep || !dst_rep) rule = Rule::kind_mismatch;
        break;
      case LinkKind::other:
        if (src_rep && dst_rep) rule = dir == Dir::up ? Rule::upward_r : Rule::rr_feedback;
        else if (!src_rep && !dst_rep) rule = dir == Dir::down ? Rule::downward_e : Rule::ee_feedforward;
        else if (src_rep && dir == Dir::up) rule = Rule::upward_r;
        else if (!src_rep && dir == Dir::down) rule = Rule::downward_e;
        break;
    }
    if (rule) report.violations.push_back({*rule, e.src, e.dst, e.via});
  }
  report.pass = report.violations.empty();
  return report;
}

std::string format_report(const ProtocolReport& r) {
  if (r.pass) return "PASS\n";
  std::ostringstream os;
  const auto classes = r.classes();
  os << "FAIL: " << r.violations.size() << " violating link(s) in " << classes.size()
     << " class(es)\n";
  for (Rule rule : classes) {
    os << "  " << rule_name(rule) << ":\n";
    for (const auto& v : r.violations) {
      if (v.rule != rule) continue;
      os << "    " << v.src << " -> " << v.dst;
      if (!v.via.empty()) os << " (via " << v.via << ")";
      os << '\n';
    }
  }
  return os.str();
}

}  // namespace predcode::arch
