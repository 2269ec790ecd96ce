#include "fan/layers.hpp"

#include <cmath>
#include <limits>
#include <random>

namespace fan {

const char* to_string(LayerKind k) {
    switch (k) {
        case LayerKind::Fan: return "fan";
        case LayerKind::FanGated: return "fan_gated";
        case LayerKind::Mlp: return "mlp";
        case LayerKind::Fsnn: return "fsnn";
        case LayerKind::FnnAct: return "fnn";
        case LayerKind::Snake: return "snake";
        case LayerKind::Linear: return "linear";
    }
    return "?";
}

const char* to_string(Activation a) {
    switch (a) {
        case Activation::Gelu: return "gelu";
        case Activation::Relu: return "relu";
        case Activation::Identity: return "identity";
    }
    return "?";
}

void LayerSpec::validate() const {
    if (d_in == 0 || d_out == 0) throw ConfigError("layer: zero dimension");
    if (kind == LayerKind::Fan || kind == LayerKind::FanGated) {
        if (2 * d_p > d_out) throw ConfigError("fan layer: 2*d_p exceeds d_out");
        if (d_p == 0 && d_pbar() == 0) throw ConfigError("fan layer: d_p and d_pbar both zero");
    }
    if (kind == LayerKind::Fsnn && fourier_terms == 0)
        throw ConfigError("fsnn layer: fourier_terms must be >= 1");
    if (residual && d_in != d_out)
        throw ConfigError("residual requires d_in == d_out");
}

void NetworkSpec::validate() const {
    if (layers.empty()) throw ConfigError("network: no layers");
    for (std::size_t i = 0; i < layers.size(); ++i) {
        layers[i].validate();
        if (i > 0 && layers[i].d_in != layers[i - 1].d_out)
            throw ConfigError("network: dimension chain broken at layer " + std::to_string(i));
    }
    if (layers.back().kind != LayerKind::Linear)
        throw ConfigError("network: final layer must be linear");
}

NetworkSpec stack_spec(LayerKind kind, std::size_t d_in, std::size_t d_h, std::size_t d_out,
                       int n_hidden, double dp_ratio, Activation act, bool residual,
                       std::size_t fsnn_terms) {
    if (n_hidden < 0) throw ConfigError("stack_spec: negative depth");
    if (dp_ratio < 0.0 || dp_ratio > 0.5) throw ConfigError("stack_spec: dp_ratio outside [0, 0.5]");
    NetworkSpec spec;
    std::size_t in = d_in;
    for (int l = 0; l < n_hidden; ++l) {
        LayerSpec ls;
        ls.kind = kind;
        ls.d_in = in;
        ls.d_out = d_h;
        ls.act = act;
        ls.residual = residual && in == d_h;
        if (kind == LayerKind::Fan || kind == LayerKind::FanGated) {
            ls.d_p = static_cast<std::size_t>(dp_ratio * static_cast<double>(d_h));
            if (ls.d_p == 0 && ls.d_pbar() == 0) ls.d_p = d_h / 2;
        }
        if (kind == LayerKind::Fsnn)
            ls.fourier_terms = fsnn_terms ? fsnn_terms : std::max<std::size_t>(1, d_h / 2);
        spec.layers.push_back(ls);
        in = d_h;
    }
    LayerSpec head;
    head.kind = LayerKind::Linear;
    head.d_in = in;
    head.d_out = d_out;
    head.act = Activation::Identity;
    spec.layers.push_back(head);
    spec.validate();
    return spec;
}

namespace {

std::int64_t i64(std::size_t v) { return static_cast<std::int64_t>(v); }

std::int64_t table_fraction(std::size_t d_p, std::size_t d_out, std::int64_t base) {
    // (1 - d_p/d_out) * base, rounded to nearest integer.
    const double v = (1.0 - static_cast<double>(d_p) / static_cast<double>(d_out)) *
                     static_cast<double>(base);
    return std::llround(v);
}

}  // namespace

CostReport count_costs(const LayerSpec& s, std::int64_t nl) {
    s.validate();
    CostReport r;
    r.flops_nonlinear = nl;
    const std::int64_t din = i64(s.d_in), dout = i64(s.d_out);
    switch (s.kind) {
        case LayerKind::Fan:
        case LayerKind::FanGated: {
            const std::int64_t dp = i64(s.d_p), dpb = i64(s.d_pbar());
            r.exact_params = dp * din + dpb * din + dpb;
            r.table_params = table_fraction(s.d_p, s.d_out, din * dout + dout);
            r.exact_flops = 2 * din * (dp + dpb) + nl * (2 * dp + dpb) + dpb;
            r.table_flops = table_fraction(s.d_p, s.d_out, 2 * din * dout) + nl * dout;
            if (s.kind == LayerKind::FanGated) {
                r.exact_params += 1;                    // one scalar gate per layer
                r.exact_flops += (2 * dp + dpb) + nl + 1;  // gate mults, sigmoid, 1-g
            }
            break;
        }
        case LayerKind::Mlp:
        case LayerKind::FnnAct:
        case LayerKind::Snake:
            r.exact_params = din * dout + dout;
            r.table_params = r.exact_params;
            r.exact_flops = 2 * din * dout + nl * dout + dout;
            r.table_flops = 2 * din * dout + nl * dout;
            break;
        case LayerKind::Linear:
            r.exact_params = din * dout + dout;
            r.table_params = r.exact_params;
            r.exact_flops = 2 * din * dout + dout;
            r.table_flops = 2 * din * dout;
            break;
        case LayerKind::Fsnn: {
            const std::int64_t n = i64(s.fourier_terms);
            r.exact_params = n * din + 2 * n * dout + dout;
            r.table_params = r.exact_params;
            r.exact_flops = 2 * din * n + nl * 2 * n + 2 * (2 * n) * dout + dout;
            r.table_flops = r.exact_flops;
            break;
        }
    }
    return r;
}

CostReport count_costs(const NetworkSpec& spec, std::int64_t nl) {
    spec.validate();
    CostReport total;
    total.flops_nonlinear = nl;
    for (const LayerSpec& s : spec.layers) {
        const CostReport r = count_costs(s, nl);
        total.exact_params += r.exact_params;
        total.table_params += r.table_params;
        total.exact_flops += r.exact_flops;
        total.table_flops += r.table_flops;
    }
    return total;
}

namespace {

Var activate(Tape& t, Var z, Activation a) {
    switch (a) {
        case Activation::Gelu: return t.gelu_elem(z);
        case Activation::Relu: return t.relu_elem(z);
        case Activation::Identity: return z;
    }
    return z;
}

}  // namespace

Var Layer::forward(Tape& t, Var x) {
    const Tensor& tx = t.value(x);
    if (tx.rows() != spec.d_in)
        throw ShapeError(std::string("layer ") + to_string(spec.kind) + ": input rows " +
                         std::to_string(tx.rows()) + ", expected " + std::to_string(spec.d_in));
    Var out;
    switch (spec.kind) {
        case LayerKind::Fan:
        case LayerKind::FanGated: {
            std::vector<Var> parts;
            Var pc, ps, sig;
            if (spec.d_p > 0) {
                Var proj = t.matmul(t.leaf(w_p), x);
                pc = t.cos_elem(proj);
                ps = t.sin_elem(proj);
            }
            if (spec.d_pbar() > 0)
                sig = activate(t, t.add_bias(t.matmul(t.leaf(w_pbar), x), t.leaf(b_pbar)), spec.act);
            if (spec.kind == LayerKind::FanGated) {
                Var g = t.sigmoid_elem(t.leaf(raw_gate));
                if (spec.d_p > 0) {
                    pc = t.scale(pc, g);
                    ps = t.scale(ps, g);
                }
                if (spec.d_pbar() > 0) sig = t.scale(sig, t.one_minus(g));
            }
            if (spec.d_p > 0) {
                parts.push_back(pc);
                parts.push_back(ps);
            }
            if (spec.d_pbar() > 0) parts.push_back(sig);
            out = t.concat_rows(parts);
            break;
        }
        case LayerKind::Mlp:
            out = activate(t, t.add_bias(t.matmul(t.leaf(w), x), t.leaf(b)), spec.act);
            break;
        case LayerKind::FnnAct:
            out = t.sin_elem(t.add_bias(t.matmul(t.leaf(w), x), t.leaf(b)));
            break;
        case LayerKind::Snake:
            out = t.snake_elem(t.add_bias(t.matmul(t.leaf(w), x), t.leaf(b)));
            break;
        case LayerKind::Linear:
            out = t.add_bias(t.matmul(t.leaf(w), x), t.leaf(b));
            break;
        case LayerKind::Fsnn: {
            Var proj = t.matmul(t.leaf(w_in), x);
            Var feats = t.concat_rows({t.cos_elem(proj), t.sin_elem(proj)});
            out = t.add_bias(t.matmul(t.leaf(w_out), feats), t.leaf(bias));
            break;
        }
    }
    if (spec.residual) out = t.add(out, x);
    return out;
}

std::vector<Parameter*> Layer::params() {
    std::vector<Parameter*> ps;
    for (Parameter* p : {&w_p, &w_pbar, &b_pbar, &raw_gate, &w, &b, &w_in, &w_out, &bias})
        if (!p->empty()) ps.push_back(p);
    return ps;
}

Var Network::forward(Tape& t, Var x) {
    Var h = x;
    for (Layer& l : layers) h = l.forward(t, h);
    return h;
}

Tensor Network::forward_value(const Tensor& x) {
    Tape t;
    return t.value(forward(t, t.constant(x)));
}

std::vector<Parameter*> Network::parameters() {
    std::vector<Parameter*> ps;
    for (Layer& l : layers)
        for (Parameter* p : l.params()) ps.push_back(p);
    return ps;
}

Layer build_layer(const LayerSpec& s, std::mt19937_64& rng) {
    s.validate();
    auto weight = [&rng](std::size_t rows, std::size_t cols, std::size_t fan_in) {
        const double limit = 1.0 / std::sqrt(static_cast<double>(fan_in));
        std::uniform_real_distribution<double> dist(-limit, limit);
        Tensor t(rows, cols);
        for (std::size_t i = 0; i < t.size(); ++i) t.data()[i] = dist(rng);
        return Parameter(t);
    };
    auto zeros = [](std::size_t rows) { return Parameter(Tensor(rows, 1)); };

    Layer l;
    l.spec = s;
    switch (s.kind) {
        case LayerKind::Fan:
        case LayerKind::FanGated:
            if (s.d_p > 0) l.w_p = weight(s.d_p, s.d_in, s.d_in);
            if (s.d_pbar() > 0) {
                l.w_pbar = weight(s.d_pbar(), s.d_in, s.d_in);
                l.b_pbar = zeros(s.d_pbar());
            }
            if (s.kind == LayerKind::FanGated) l.raw_gate = Parameter(Tensor::scalar(0.0));
            break;
        case LayerKind::Mlp:
        case LayerKind::FnnAct:
        case LayerKind::Snake:
        case LayerKind::Linear:
            l.w = weight(s.d_out, s.d_in, s.d_in);
            l.b = zeros(s.d_out);
            break;
        case LayerKind::Fsnn:
            l.w_in = weight(s.fourier_terms, s.d_in, s.d_in);
            l.w_out = weight(s.d_out, 2 * s.fourier_terms, 2 * s.fourier_terms);
            l.bias = zeros(s.d_out);
            break;
    }
    return l;
}

Network build_network(const NetworkSpec& spec, std::uint64_t seed) {
    spec.validate();
    Network net;
    net.spec = spec;
    std::mt19937_64 rng(seed);
    for (const LayerSpec& s : spec.layers) net.layers.push_back(build_layer(s, rng));
    return net;
}

Layer fsnn_from_series(std::span<const double> a, std::span<const double> b, double period) {
    if (a.size() != b.size() || a.size() < 2)
        throw ConfigError("fsnn_from_series: need matching a/b with at least one harmonic");
    const std::size_t n = a.size() - 1;
    const double base = 2.0 * 3.14159265358979323846 / period;

    LayerSpec s;
    s.kind = LayerKind::Fsnn;
    s.d_in = 1;
    s.d_out = 1;
    s.fourier_terms = n;

    Layer l;
    l.spec = s;
    Tensor w_in(n, 1), w_out(1, 2 * n);
    for (std::size_t k = 0; k < n; ++k) {
        w_in(k, 0) = base * static_cast<double>(k + 1);
        w_out(0, k) = a[k + 1];      // cos block
        w_out(0, n + k) = b[k + 1];  // sin block
    }
    l.w_in = Parameter(w_in);
    l.w_out = Parameter(w_out);
    l.bias = Parameter(Tensor::scalar(a[0]));
    return l;
}

std::size_t match_hidden_width(std::int64_t target_params, LayerKind kind, std::size_t d_in,
                               std::size_t d_out, int n_hidden, Activation act) {
    std::size_t best = 1;
    std::int64_t best_diff = std::numeric_limits<std::int64_t>::max();
    for (std::size_t d_h = 1; d_h <= 8192; ++d_h) {
        const auto c = count_costs(stack_spec(kind, d_in, d_h, d_out, n_hidden, 0.25, act));
        const std::int64_t diff = std::llabs(c.exact_params - target_params);
        if (diff < best_diff) {
            best_diff = diff;
            best = d_h;
        }
        if (c.exact_params > target_params && diff > best_diff) break;
    }
    return best;
}

}  // namespace fan
