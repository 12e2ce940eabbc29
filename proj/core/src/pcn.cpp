#include "predcode/pcn.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace predcode::pcn {

std::string_view mode_name(Mode m) {
  switch (m) {
    case Mode::plain: return "plain";
    case Mode::global: return "global";
    case Mode::local: return "local";
  }
  return "plain";
}

Mode parse_mode(std::string_view name) {
  if (name == "plain") return Mode::plain;
  if (name == "global") return Mode::global;
  if (name == "local") return Mode::local;
  throw std::invalid_argument("unknown PCN mode '" + std::string(name) +
                              "' (expected plain, global or local)");
}

PCNNet PCNNet::create(const PCNConfig& config, Rng& rng) {
  if (config.dims.size() < 2) throw std::invalid_argument("PCNNet: need an input and a hidden layer");
  if (config.classes < 2) throw std::invalid_argument("PCNNet: need at least two classes");
  auto init = [&](Matrix& m) {
    const double s = config.init_scale > 0.0 ? config.init_scale
                                             : 1.0 / std::sqrt(static_cast<double>(m.cols()));
    for (double& w : m.span()) w = rng.uniform(-s, s);
  };
  PCNNet n;
  n.T = config.T;
  n.max_T = config.max_T;
  n.k1 = config.k1;
  n.beta = config.beta;
  n.skip = config.skip;
  n.r0 = Vector(config.dims.front());
  for (std::size_t l = 1; l < config.dims.size(); ++l) {
    PCNLayer layer;
    layer.W_ff = Matrix(config.dims[l], config.dims[l - 1]);
    init(layer.W_ff);
    layer.b = Vector(config.dims[l]);
    layer.W_fb = Matrix(config.dims[l - 1], config.dims[l]);
    init(layer.W_fb);
    layer.r = Vector(config.dims[l]);
    n.layers.push_back(std::move(layer));
  }
  n.head = Matrix(config.classes, config.dims.back());
  init(n.head);
  n.head_b = Vector(config.classes);
  n.validate();
  return n;
}

void PCNNet::validate() const {
  if (layers.empty()) throw std::invalid_argument("PCNNet: no layers");
  if (!(beta >= 0.0 && beta <= 1.0)) throw std::invalid_argument("PCNNet: beta must be in [0, 1]");
  if (T > max_T) {
    throw std::invalid_argument("PCNNet: T = " + std::to_string(T) + " exceeds max_T = " +
                                std::to_string(max_T));
  }
  std::size_t below = r0.size();
  for (const auto& layer : layers) {
    const std::size_t d = layer.W_ff.rows();
    if (layer.W_ff.cols() != below) throw DimensionError("PCNNet W_ff", layer.W_ff.shape(), {d, below});
    if (layer.W_fb.rows() != below || layer.W_fb.cols() != d) {
      throw DimensionError("PCNNet W_fb", layer.W_fb.shape(), {below, d});
    }
    if (layer.b.size() != d) throw DimensionError("PCNNet bias", layer.b.shape(), {d, 1});
    if (layer.r.size() != d) throw DimensionError("PCNNet state", layer.r.shape(), {d, 1});
    if (skip && d != below) {
      throw DimensionError("PCNNet skip connection", {d, 1}, {below, 1});
    }
    below = d;
  }
  if (head.cols() != below) throw DimensionError("PCNNet head", head.shape(), {head.rows(), below});
  if (head_b.size() != head.rows()) throw DimensionError("PCNNet head bias", head_b.shape(), {head.rows(), 1});
}

// ---- single operations --------------------------------------------------------

Vector pcn_predict_down(const PCNLayer& upper, const Vector& r_upper) {
  return matvec(upper.W_fb, r_upper);
}

namespace {

// alpha a + beta c; every update in the network is one of these blends.
Vector lin(double alpha, const Vector& a, double beta, const Vector& c) {
  if (a.size() != c.size()) throw DimensionError("lin", a.shape(), c.shape());
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = alpha * a[i] + beta * c[i];
  return out;
}

}  // namespace

Vector pcn_error(const Vector& r_lower, const Vector& r_hat_lower) {
  if (r_lower.size() != r_hat_lower.size()) {
    throw DimensionError("pcn_error", r_lower.shape(), r_hat_lower.shape());
  }
  return lin(1.0, r_lower, -1.0, r_hat_lower);
}

Vector pcn_ff_update(const PCNLayer& layer, const Vector& e_below, double k1) {
  if (layer.W_ff.cols() != e_below.size()) {
    throw DimensionError("pcn_ff_update", layer.W_ff.shape(), e_below.shape());
  }
  return lin(1.0, layer.r, k1, matvec(layer.W_ff, e_below));
}

Vector pcn_fb_update(const Vector& r, const Vector& r_hat, double beta) {
  if (r.size() != r_hat.size()) throw DimensionError("pcn_fb_update", r.shape(), r_hat.shape());
  return lin(1.0 - beta, r, beta, r_hat);
}

// ---- shared unrolled computation ----------------------------------------------

namespace {

// Evaluates with concrete vectors.
class Eager {
 public:
  using Val = Vector;
  static constexpr bool kMeasures = true;

  explicit Eager(const PCNNet& n) : n_(n) {}

  Val ff(std::size_t l, const Val& a) { return matvec(n_.layers[l - 1].W_ff, a); }
  Val fb(std::size_t l, const Val& a) { return matvec(n_.layers[l - 1].W_fb, a); }
  Val bias(std::size_t l, const Val& a) { return add(a, n_.layers[l - 1].b); }
  Val relu(const Val& a) {
    Vector out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] > 0.0 ? a[i] : 0.0;
    return out;
  }
  Val lin(double alpha, const Val& a, double beta, const Val& c) {
    return ::predcode::pcn::lin(alpha, a, beta, c);
  }
  Val head(const Val& a) { return add(matvec(n_.head, a), n_.head_b); }

  double layer_error(const std::vector<Val>& r, std::size_t l) {
    return norm_sq(pcn_error(r[l - 1], fb(l, r[l])));
  }

 private:
  const PCNNet& n_;
};

// Records the same computation for reverse-mode differentiation.
class Tape {
 public:
  using Val = std::size_t;
  static constexpr bool kMeasures = false;

  explicit Tape(const PCNNet& n) : n_(n) {}

  Val leaf(Vector v) { return push({Op::leaf, std::move(v)}); }
  Val ff(std::size_t l, Val a) {
    return push({Op::ff, matvec(n_.layers[l - 1].W_ff, value(a)), a, 0, l});
  }
  Val fb(std::size_t l, Val a) {
    return push({Op::fb, matvec(n_.layers[l - 1].W_fb, value(a)), a, 0, l});
  }
  Val bias(std::size_t l, Val a) { return push({Op::bias, add(value(a), n_.layers[l - 1].b), a, 0, l}); }
  Val relu(Val a) {
    Vector out = value(a);
    for (double& x : out) x = x > 0.0 ? x : 0.0;
    return push({Op::relu, std::move(out), a});
  }
  Val lin(double alpha, Val a, double beta, Val c) {
    return push({Op::lin, ::predcode::pcn::lin(alpha, value(a), beta, value(c)), a, c, 0, alpha, beta});
  }
  Val head(Val a) { return push({Op::head, add(matvec(n_.head, value(a)), n_.head_b), a}); }

  double layer_error(const std::vector<Val>&, std::size_t) { return 0.0; }

  const Vector& value(Val v) const { return nodes_[v].value; }

  /// Accumulates d(out · seed)/d(params) into `g`, which mirrors n's shapes.
  void backward(Val out, const Vector& seed, PCNNet& g) {
    std::vector<Vector> grads(nodes_.size());
    grads[out] = seed;
    for (std::size_t k = nodes_.size(); k-- > 0;) {
      if (grads[k].empty()) continue;
      const Node& node = nodes_[k];
      const Vector& gy = grads[k];
      auto flow = [&](Val to, const Vector& gx) {
        if (grads[to].empty()) grads[to] = Vector(gx.size());
        axpy(1.0, gx, grads[to]);
      };
      switch (node.op) {
        case Op::leaf:
          break;
        case Op::ff: {
          const PCNLayer& layer = n_.layers[node.layer - 1];
          rank1_update(g.layers[node.layer - 1].W_ff, 1.0, gy, value(node.a));
          flow(node.a, matvec_transposed(layer.W_ff, gy));
          break;
        }
        case Op::fb: {
          const PCNLayer& layer = n_.layers[node.layer - 1];
          rank1_update(g.layers[node.layer - 1].W_fb, 1.0, gy, value(node.a));
          flow(node.a, matvec_transposed(layer.W_fb, gy));
          break;
        }
        case Op::bias:
          axpy(1.0, gy, g.layers[node.layer - 1].b);
          flow(node.a, gy);
          break;
        case Op::relu: {
          Vector gx(gy.size());
          const Vector& x = value(node.a);
          for (std::size_t i = 0; i < gx.size(); ++i) gx[i] = x[i] > 0.0 ? gy[i] : 0.0;
          flow(node.a, gx);
          break;
        }
        case Op::lin:
          flow(node.a, scale(gy, node.alpha));
          flow(node.c, scale(gy, node.beta));
          break;
        case Op::head:
          rank1_update(g.head, 1.0, gy, value(node.a));
          axpy(1.0, gy, g.head_b);
          flow(node.a, matvec_transposed(n_.head, gy));
          break;
      }
    }
  }

 private:
  enum class Op { leaf, ff, fb, bias, relu, lin, head };

  struct Node {
    Op op;
    Vector value;
    Val a = 0;
    Val c = 0;
    std::size_t layer = 0;
    double alpha = 0.0;
    double beta = 0.0;
  };

  Val push(Node node) {
    nodes_.push_back(std::move(node));
    return nodes_.size() - 1;
  }

  const PCNNet& n_;
  std::vector<Node> nodes_;
};

template <class B>
typename B::Val sweep_layer(B& b, const PCNNet& n, std::size_t l, const typename B::Val& below) {
  auto z = b.bias(l, b.ff(l, below));
  return n.layers[l - 1].relu ? b.relu(z) : z;
}

template <class B>
void local_step(B& b, const PCNNet& n, std::vector<typename B::Val>& r, std::size_t l) {
  auto e = b.lin(1.0, r[l - 1], -1.0, b.fb(l, r[l]));
  r[l] = b.lin(1.0, r[l], n.k1, b.ff(l, e));
}

template <class B>
void global_step(B& b, const PCNNet& n, std::vector<typename B::Val>& r) {
  const std::size_t L = n.depth();
  for (std::size_t l = L; l >= 1; --l) {
    r[l - 1] = b.lin(1.0 - n.beta, r[l - 1], n.beta, b.fb(l, r[l]));
  }
  for (std::size_t l = 1; l <= L; ++l) local_step(b, n, r, l);
}

template <class B>
double total_error(B& b, const std::vector<typename B::Val>& r, std::size_t L) {
  double s = 0.0;
  for (std::size_t l = 1; l <= L; ++l) s += b.layer_error(r, l);
  return s;
}

struct Unrolled {
  double error_before = 0.0;
  double error_after = 0.0;
};

// Runs the full forward computation; `r` receives the final state (r[0] is
// the working copy of the input). Returns the logits value.
template <class B>
typename B::Val unroll(B& b, const PCNNet& n, typename B::Val x, Mode mode,
                       std::vector<typename B::Val>& r, Unrolled& info) {
  const std::size_t L = n.depth();
  const std::size_t T = mode == Mode::plain ? 0 : n.T;
  r.assign(L + 1, typename B::Val{});
  r[0] = x;
  if (mode != Mode::local) {
    for (std::size_t l = 1; l <= L; ++l) {
      r[l] = sweep_layer(b, n, l, r[l - 1]);
      if (n.skip) r[l] = b.lin(1.0, r[l], 1.0, r[l - 1]);
    }
    if constexpr (B::kMeasures) info.error_before = total_error(b, r, L);
    for (std::size_t t = 0; t < T; ++t) global_step(b, n, r);
    if constexpr (B::kMeasures) info.error_after = total_error(b, r, L);
  } else {
    for (std::size_t l = 1; l <= L; ++l) {
      r[l] = sweep_layer(b, n, l, r[l - 1]);
      if constexpr (B::kMeasures) info.error_before += b.layer_error(r, l);
      for (std::size_t t = 0; t < T; ++t) local_step(b, n, r, l);
      if constexpr (B::kMeasures) info.error_after += b.layer_error(r, l);
      if (n.skip) r[l] = b.lin(1.0, r[l], 1.0, r[l - 1]);
    }
  }
  return b.head(r[L]);
}

std::vector<Vector> state_of(const PCNNet& n) {
  std::vector<Vector> r{n.r0};
  for (const auto& layer : n.layers) r.push_back(layer.r);
  return r;
}

void store_state(PCNNet& n, std::vector<Vector>& r) {
  n.r0 = std::move(r[0]);
  for (std::size_t l = 1; l < r.size(); ++l) n.layers[l - 1].r = std::move(r[l]);
}

void check_input(const PCNNet& n, const Vector& x) {
  if (x.size() != n.input_dim()) throw DimensionError("pcn_forward", n.layers.front().W_ff.shape(), x.shape());
}

double cross_entropy(const Vector& logits, std::size_t label, Vector* grad) {
  if (label >= logits.size()) {
    throw std::out_of_range("label " + std::to_string(label) + " out of range for " +
                            std::to_string(logits.size()) + " classes");
  }
  const double mx = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double z : logits) sum += std::exp(z - mx);
  const double lse = mx + std::log(sum);
  if (grad) {
    *grad = Vector(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i) (*grad)[i] = std::exp(logits[i] - lse);
    (*grad)[label] -= 1.0;
  }
  return lse - logits[label];
}

std::size_t argmax(const Vector& v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

}  // namespace

void pcn_sweep(PCNNet& n, const Vector& x) {
  n.validate();
  check_input(n, x);
  Eager b(n);
  std::vector<Vector> r;
  Unrolled info;
  unroll(b, n, x, Mode::plain, r, info);
  store_state(n, r);
}

PCNNet pcn_global_cycle(const PCNNet& n) {
  n.validate();
  Eager b(n);
  auto r = state_of(n);
  global_step(b, n, r);
  PCNNet out = n;
  store_state(out, r);
  return out;
}

PCNNet pcn_local_cycle(const PCNNet& n, std::size_t l) {
  n.validate();
  if (l == 0 || l > n.depth()) {
    throw std::out_of_range("pcn_local_cycle: layer " + std::to_string(l) + " not in 1.." +
                            std::to_string(n.depth()));
  }
  Eager b(n);
  auto r = state_of(n);
  local_step(b, n, r, l);
  PCNNet out = n;
  store_state(out, r);
  return out;
}

double pcn_prediction_error(const PCNNet& n) {
  Eager b(n);
  return total_error(b, state_of(n), n.depth());
}

PCNForward pcn_forward(PCNNet& n, const Vector& x, Mode mode) {
  n.validate();
  check_input(n, x);
  Eager b(n);
  std::vector<Vector> r;
  Unrolled info;
  PCNForward out;
  out.logits = unroll(b, n, x, mode, r, info);
  out.error_before = info.error_before;
  out.error_after = info.error_after;
  store_state(n, r);
  require_finite(out.logits.span(), "pcn_forward");
  return out;
}

Vector pcn_logits(const PCNNet& n, const Vector& x, Mode mode) {
  PCNNet copy = n;
  return pcn_forward(copy, x, mode).logits;
}

// ---- training -----------------------------------------------------------------

Vector pcn_parameters(const PCNNet& n) {
  std::vector<double> flat;
  auto put = [&](std::span<const double> s) { flat.insert(flat.end(), s.begin(), s.end()); };
  for (const auto& layer : n.layers) {
    put(layer.W_ff.span());
    put(layer.b.span());
    put(layer.W_fb.span());
  }
  put(n.head.span());
  put(n.head_b.span());
  return Vector(std::move(flat));
}

void pcn_set_parameters(PCNNet& n, const Vector& flat) {
  std::size_t expected = n.head.size() + n.head_b.size();
  for (const auto& layer : n.layers) expected += layer.W_ff.size() + layer.b.size() + layer.W_fb.size();
  if (flat.size() != expected) throw DimensionError("pcn_set_parameters", {expected, 1}, flat.shape());
  std::size_t k = 0;
  auto take = [&](std::span<double> s) {
    for (double& x : s) x = flat[k++];
  };
  for (auto& layer : n.layers) {
    take(layer.W_ff.span());
    take(layer.b.span());
    take(layer.W_fb.span());
  }
  take(n.head.span());
  take(n.head_b.span());
}

double pcn_loss(const PCNNet& n, std::span<const Sample> batch, Mode mode) {
  if (batch.empty()) throw std::invalid_argument("pcn_loss: empty batch");
  double sum = 0.0;
  for (const auto& s : batch) sum += cross_entropy(pcn_logits(n, s.x, mode), s.label, nullptr);
  return sum / static_cast<double>(batch.size());
}

PCNGradient pcn_gradient(const PCNNet& n, std::span<const Sample> batch, Mode mode) {
  if (batch.empty()) throw std::invalid_argument("pcn_gradient: empty batch");
  n.validate();
  PCNNet g = n;
  pcn_set_parameters(g, Vector(pcn_parameters(n).size()));
  const double inv = 1.0 / static_cast<double>(batch.size());
  PCNGradient out;
  for (const auto& s : batch) {
    check_input(n, s.x);
    Tape tape(n);
    std::vector<Tape::Val> r;
    Unrolled info;
    const auto logits = unroll(tape, n, tape.leaf(s.x), mode, r, info);
    Vector seed;
    out.loss += inv * cross_entropy(tape.value(logits), s.label, &seed);
    tape.backward(logits, scale(seed, inv), g);
  }
  out.grad = pcn_parameters(g);
  require_finite(out.grad.span(), "pcn_gradient");
  return out;
}

double pcn_train_step(PCNNet& n, std::span<const Sample> batch, Mode mode, double lr) {
  const PCNGradient g = pcn_gradient(n, batch, mode);
  Vector p = pcn_parameters(n);
  axpy(-lr, g.grad, p);
  pcn_set_parameters(n, p);
  return g.loss;
}

PCNEval pcn_evaluate(const PCNNet& n, const Dataset& data, Mode mode) {
  if (data.empty()) throw std::invalid_argument("pcn_evaluate: empty dataset");
  PCNNet work = n;
  PCNEval ev;
  std::size_t correct = 0;
  for (const auto& s : data) {
    const PCNForward f = pcn_forward(work, s.x, mode);
    ev.cross_entropy += cross_entropy(f.logits, s.label, nullptr);
    ev.error_before += f.error_before;
    ev.error_after += f.error_after;
    if (argmax(f.logits) == s.label) ++correct;
  }
  const double m = static_cast<double>(data.size());
  ev.accuracy = static_cast<double>(correct) / m;
  ev.cross_entropy /= m;
  ev.error_before /= m;
  ev.error_after /= m;
  return ev;
}

std::vector<PCNEpochLog> pcn_train(PCNNet& n, const Dataset& data, const PCNTrainOptions& options,
                                   Rng& rng) {
  if (data.empty()) throw std::invalid_argument("pcn_train: empty dataset");
  if (options.batch == 0) throw std::invalid_argument("pcn_train: batch must be >= 1");
  std::vector<std::size_t> order(data.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::vector<Sample> batch;
  std::vector<PCNEpochLog> log;
  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.index(i)]);
    for (std::size_t start = 0; start < order.size(); start += options.batch) {
      batch.clear();
      const std::size_t stop = std::min(order.size(), start + options.batch);
      for (std::size_t i = start; i < stop; ++i) batch.push_back(data[order[i]]);
      pcn_train_step(n, batch, options.mode, options.lr);
    }
    const PCNEval ev = pcn_evaluate(n, data, options.mode);
    log.push_back({epoch, options.mode, options.mode == Mode::plain ? 0 : n.T, ev.cross_entropy,
                   ev.error_after, ev.accuracy});
  }
  return log;
}

// ---- synthetic datasets -------------------------------------------------------

Dataset two_gaussians(Rng& rng, std::size_t n, std::size_t dim, double separation, double sd) {
  if (dim == 0) throw std::invalid_argument("two_gaussians: dim must be >= 1");
  Dataset out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Sample s{Vector(dim), i % 2};
    for (std::size_t k = 0; k < dim; ++k) s.x[k] = rng.normal(0.0, sd);
    s.x[0] += (s.label == 0 ? -0.5 : 0.5) * separation;
    out.push_back(std::move(s));
  }
  return out;
}

Dataset two_moons(Rng& rng, std::size_t n, double noise) {
  Dataset out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t label = i % 2;
    const double t = rng.uniform(0.0, std::numbers::pi);
    Vector x = label == 0 ? Vector{std::cos(t), std::sin(t)}
                          : Vector{1.0 - std::cos(t), 0.5 - std::sin(t)};
    x[0] += rng.normal(0.0, noise);
    x[1] += rng.normal(0.0, noise);
    out.push_back({std::move(x), label});
  }
  return out;
}

std::vector<Vector> raster_glyphs() {
  static constexpr std::array<std::array<const char*, 8>, 10> kGlyphs{{
      {"..####..", ".#....#.", ".#...##.", ".#..#.#.", ".#.#..#.", ".##...#.", ".#....#.", "..####.."},
      {"...##...", "..###...", ".#.##...", "...##...", "...##...", "...##...", "...##...", ".######."},
      {"..####..", ".#....#.", "......#.", ".....#..", "...##...", "..#.....", ".#......", ".######."},
      {"..####..", ".#....#.", "......#.", "...###..", "......#.", "......#.", ".#....#.", "..####.."},
      {".....#..", "....##..", "...#.#..", "..#..#..", ".#...#..", ".######.", ".....#..", ".....#.."},
      {".######.", ".#......", ".#......", ".#####..", "......#.", "......#.", ".#....#.", "..####.."},
      {"..####..", ".#......", ".#......", ".#####..", ".#....#.", ".#....#.", ".#....#.", "..####.."},
      {".######.", "......#.", ".....#..", "....#...", "...#....", "...#....", "...#....", "...#...."},
      {"..####..", ".#....#.", ".#....#.", "..####..", ".#....#.", ".#....#.", ".#....#.", "..####.."},
      {"..####..", ".#....#.", ".#....#.", "..#####.", "......#.", "......#.", "......#.", "..####.."},
  }};
  std::vector<Vector> out;
  for (const auto& g : kGlyphs) {
    Vector v(64);
    for (std::size_t r = 0; r < 8; ++r)
      for (std::size_t c = 0; c < 8; ++c) v[r * 8 + c] = g[r][c] == '#' ? 1.0 : 0.0;
    out.push_back(std::move(v));
  }
  return out;
}

Dataset raster_digits(Rng& rng, std::size_t n, double flip_prob, double noise_sd) {
  const auto glyphs = raster_glyphs();
  Dataset out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t label = i % glyphs.size();
    Vector x = glyphs[label];
    for (double& p : x) {
      if (rng.bernoulli(flip_prob)) p = 1.0 - p;
      p += rng.normal(0.0, noise_sd);
    }
    out.push_back({std::move(x), label});
  }
  return out;
}

}  // namespace predcode::pcn
