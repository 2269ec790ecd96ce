#include "fan/tape.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <utility>

namespace fan {

namespace {

using MatMap = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using CMatMap = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

CMatMap cmap(const Tensor& t) { return CMatMap(t.data(), t.rows(), t.cols()); }
MatMap mmap(Tensor& t) { return MatMap(t.data(), t.rows(), t.cols()); }

constexpr double kInvSqrt2 = 0.7071067811865475244;
constexpr double kInvSqrt2Pi = 0.3989422804014326779;

double gelu_val(double x) { return 0.5 * x * std::erfc(-x * kInvSqrt2); }
double gelu_der(double x) {
    const double cdf = 0.5 * std::erfc(-x * kInvSqrt2);
    const double pdf = kInvSqrt2Pi * std::exp(-0.5 * x * x);
    return cdf + x * pdf;
}

double sigmoid_val(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

void Tape::check_finite(const Tensor& t, const char* op) {
    if (!t.all_finite()) throw NumericError(std::string(op) + ": non-finite value");
}

Var Tape::push(Tensor value, std::function<void(Tape&, const Tensor&)> pull) {
    Node n;
    n.grad = Tensor::zeros_like(value);
    n.value = std::move(value);
    n.pull = std::move(pull);
    nodes_.push_back(std::move(n));
    return Var{this, nodes_.size() - 1};
}

Var Tape::leaf(Parameter& p) {
    if (p.empty()) throw ContractError("leaf: empty parameter");
    check_finite(p.value, "leaf");
    Var v = push(p.value);
    nodes_.back().leaf = &p;
    return v;
}

Var Tape::constant(Tensor t) {
    check_finite(t, "constant");
    return push(std::move(t));
}

Var Tape::matmul(Var a, Var b) {
    const Tensor& ta = value(a);
    const Tensor& tb = value(b);
    if (ta.cols() != tb.rows())
        throw ShapeError("matmul: " + ta.shape_str() + " * " + tb.shape_str());
    Tensor out(ta.rows(), tb.cols());
    mmap(out).noalias() = cmap(ta) * cmap(tb);
    check_finite(out, "matmul");
    return push(std::move(out), [ai = a.id, bi = b.id](Tape& t, const Tensor& g) {
        const Tensor& va = t.nodes_[ai].value;
        const Tensor& vb = t.nodes_[bi].value;
        mmap(t.grad_mut(ai)).noalias() += cmap(g) * cmap(vb).transpose();
        mmap(t.grad_mut(bi)).noalias() += cmap(va).transpose() * cmap(g);
    });
}

Var Tape::add(Var a, Var b) {
    const Tensor& ta = value(a);
    const Tensor& tb = value(b);
    if (!ta.same_shape(tb))
        throw ShapeError("add: " + ta.shape_str() + " vs " + tb.shape_str());
    Tensor out = ta;
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] += tb.data()[i];
    check_finite(out, "add");
    return push(std::move(out), [ai = a.id, bi = b.id](Tape& t, const Tensor& g) {
        Tensor& ga = t.grad_mut(ai);
        Tensor& gb = t.grad_mut(bi);
        for (std::size_t i = 0; i < g.size(); ++i) {
            ga.data()[i] += g.data()[i];
            gb.data()[i] += g.data()[i];
        }
    });
}

Var Tape::add_bias(Var x, Var b) {
    const Tensor& tx = value(x);
    const Tensor& tb = value(b);
    if (tb.cols() != 1 || tb.rows() != tx.rows())
        throw ShapeError("add_bias: x " + tx.shape_str() + ", b " + tb.shape_str());
    Tensor out = tx;
    for (std::size_t i = 0; i < out.rows(); ++i)
        for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) += tb(i, 0);
    check_finite(out, "add_bias");
    return push(std::move(out), [xi = x.id, bi = b.id](Tape& t, const Tensor& g) {
        Tensor& gx = t.grad_mut(xi);
        Tensor& gb = t.grad_mut(bi);
        for (std::size_t i = 0; i < g.rows(); ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < g.cols(); ++j) {
                gx(i, j) += g(i, j);
                s += g(i, j);
            }
            gb(i, 0) += s;
        }
    });
}

Var Tape::concat_rows(const std::vector<Var>& parts) {
    if (parts.empty()) throw ShapeError("concat_rows: no parts");
    const std::size_t cols = value(parts[0]).cols();
    std::size_t rows = 0;
    for (Var p : parts) {
        const Tensor& tp = value(p);
        if (tp.cols() != cols) throw ShapeError("concat_rows: column mismatch");
        rows += tp.rows();
    }
    Tensor out(rows, cols);
    std::size_t r0 = 0;
    for (Var p : parts) {
        const Tensor& tp = value(p);
        for (std::size_t i = 0; i < tp.rows(); ++i)
            for (std::size_t j = 0; j < cols; ++j) out(r0 + i, j) = tp(i, j);
        r0 += tp.rows();
    }
    std::vector<std::size_t> ids;
    ids.reserve(parts.size());
    for (Var p : parts) ids.push_back(p.id);
    return push(std::move(out), [ids](Tape& t, const Tensor& g) {
        std::size_t r0 = 0;
        for (std::size_t id : ids) {
            Tensor& gp = t.grad_mut(id);
            for (std::size_t i = 0; i < gp.rows(); ++i)
                for (std::size_t j = 0; j < gp.cols(); ++j) gp(i, j) += g(r0 + i, j);
            r0 += gp.rows();
        }
    });
}

Var Tape::slice_rows(Var x, std::size_t row0, std::size_t nrows) {
    const Tensor& tx = value(x);
    if (row0 + nrows > tx.rows()) throw ShapeError("slice_rows: range out of bounds");
    Tensor out(nrows, tx.cols());
    for (std::size_t i = 0; i < nrows; ++i)
        for (std::size_t j = 0; j < tx.cols(); ++j) out(i, j) = tx(row0 + i, j);
    return push(std::move(out), [xi = x.id, row0](Tape& t, const Tensor& g) {
        Tensor& gx = t.grad_mut(xi);
        for (std::size_t i = 0; i < g.rows(); ++i)
            for (std::size_t j = 0; j < g.cols(); ++j) gx(row0 + i, j) += g(i, j);
    });
}

Var Tape::map_unary(Var x, std::function<double(double)> f, std::function<double(double)> df) {
    const Tensor& tx = value(x);
    Tensor out = Tensor::zeros_like(tx);
    for (std::size_t i = 0; i < tx.size(); ++i) out.data()[i] = f(tx.data()[i]);
    check_finite(out, "map_unary");
    return push(std::move(out), [xi = x.id, df = std::move(df)](Tape& t, const Tensor& g) {
        const Tensor& vx = t.nodes_[xi].value;
        Tensor& gx = t.grad_mut(xi);
        for (std::size_t i = 0; i < g.size(); ++i)
            gx.data()[i] += g.data()[i] * df(vx.data()[i]);
    });
}

Var Tape::cos_elem(Var x) {
    return map_unary(x, [](double v) { return std::cos(v); },
                     [](double v) { return -std::sin(v); });
}

Var Tape::sin_elem(Var x) {
    return map_unary(x, [](double v) { return std::sin(v); },
                     [](double v) { return std::cos(v); });
}

Var Tape::gelu_elem(Var x) { return map_unary(x, gelu_val, gelu_der); }

Var Tape::relu_elem(Var x) {
    return map_unary(x, [](double v) { return v > 0.0 ? v : 0.0; },
                     [](double v) { return v > 0.0 ? 1.0 : 0.0; });
}

Var Tape::sigmoid_elem(Var x) {
    return map_unary(x, sigmoid_val, [](double v) {
        const double s = sigmoid_val(v);
        return s * (1.0 - s);
    });
}

Var Tape::snake_elem(Var x) {
    return map_unary(x, [](double v) {
        const double s = std::sin(v);
        return v + s * s;
    },
    [](double v) { return 1.0 + std::sin(2.0 * v); });
}

Var Tape::scale(Var x, double s) {
    const Tensor& tx = value(x);
    Tensor out = tx;
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] *= s;
    check_finite(out, "scale");
    return push(std::move(out), [xi = x.id, s](Tape& t, const Tensor& g) {
        Tensor& gx = t.grad_mut(xi);
        for (std::size_t i = 0; i < g.size(); ++i) gx.data()[i] += s * g.data()[i];
    });
}

Var Tape::scale(Var x, Var s) {
    const Tensor& ts = value(s);
    if (ts.rows() != 1 || ts.cols() != 1) throw ShapeError("scale: s must be 1x1");
    const Tensor& tx = value(x);
    const double sv = ts(0, 0);
    Tensor out = tx;
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] *= sv;
    check_finite(out, "scale");
    return push(std::move(out), [xi = x.id, si = s.id](Tape& t, const Tensor& g) {
        const Tensor& vx = t.nodes_[xi].value;
        const double sv = t.nodes_[si].value(0, 0);
        Tensor& gx = t.grad_mut(xi);
        double gs = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
            gx.data()[i] += sv * g.data()[i];
            gs += vx.data()[i] * g.data()[i];
        }
        t.grad_mut(si)(0, 0) += gs;
    });
}

Var Tape::one_minus(Var x) {
    const Tensor& tx = value(x);
    Tensor out = Tensor::zeros_like(tx);
    for (std::size_t i = 0; i < tx.size(); ++i) out.data()[i] = 1.0 - tx.data()[i];
    return push(std::move(out), [xi = x.id](Tape& t, const Tensor& g) {
        Tensor& gx = t.grad_mut(xi);
        for (std::size_t i = 0; i < g.size(); ++i) gx.data()[i] -= g.data()[i];
    });
}

Var Tape::sum(Var x) {
    const Tensor& tx = value(x);
    double s = 0.0;
    for (std::size_t i = 0; i < tx.size(); ++i) s += tx.data()[i];
    Tensor out = Tensor::scalar(s);
    check_finite(out, "sum");
    return push(std::move(out), [xi = x.id](Tape& t, const Tensor& g) {
        Tensor& gx = t.grad_mut(xi);
        const double gv = g(0, 0);
        for (std::size_t i = 0; i < gx.size(); ++i) gx.data()[i] += gv;
    });
}

Var Tape::mse_loss(Var pred, Var target) {
    const Tensor& tp = value(pred);
    const Tensor& tt = value(target);
    if (!tp.same_shape(tt))
        throw ShapeError("mse_loss: " + tp.shape_str() + " vs " + tt.shape_str());
    const double n = static_cast<double>(tp.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < tp.size(); ++i) {
        const double d = tp.data()[i] - tt.data()[i];
        acc += d * d;
    }
    Tensor out = Tensor::scalar(acc / n);
    check_finite(out, "mse_loss");
    return push(std::move(out), [pi = pred.id, ti = target.id, n](Tape& t, const Tensor& g) {
        const Tensor& vp = t.nodes_[pi].value;
        const Tensor& vt = t.nodes_[ti].value;
        Tensor& gp = t.grad_mut(pi);
        Tensor& gt = t.grad_mut(ti);
        const double c = 2.0 * g(0, 0) / n;
        for (std::size_t i = 0; i < vp.size(); ++i) {
            const double d = c * (vp.data()[i] - vt.data()[i]);
            gp.data()[i] += d;
            gt.data()[i] -= d;
        }
    });
}

void Tape::backward(Var loss) {
    if (loss.tape != this) throw ContractError("backward: loss from another tape");
    const Tensor& lv = value(loss);
    if (lv.rows() != 1 || lv.cols() != 1) throw ContractError("backward: loss must be scalar");
    for (Node& n : nodes_) n.grad.fill(0.0);
    nodes_[loss.id].grad(0, 0) = 1.0;
    for (std::size_t i = loss.id + 1; i-- > 0;) {
        Node& n = nodes_[i];
        if (n.pull) n.pull(*this, n.grad);
    }
    for (Node& n : nodes_) {
        if (!n.leaf) continue;
        Tensor& pg = n.leaf->grad;
        for (std::size_t i = 0; i < pg.size(); ++i) pg.data()[i] += n.grad.data()[i];
    }
}

double gradcheck(const std::function<Var(Tape&, Var)>& f, const Tensor& x, double eps) {
    if (eps <= 0.0 || eps > 1e-3) throw ContractError("gradcheck: eps out of (0, 1e-3]");

    Parameter px(x);
    Tape tape;
    Var out = f(tape, tape.leaf(px));
    const Tensor& ov = tape.value(out);
    if (ov.rows() != 1 || ov.cols() != 1) throw ContractError("gradcheck: f must be scalar-valued");
    tape.backward(out);
    const Tensor analytic = px.grad;

    auto eval = [&](const Tensor& at) {
        Tape t;
        return f(t, t.constant(at)).value()(0, 0);
    };

    double max_err = 0.0;
    Tensor probe = x;
    for (std::size_t i = 0; i < probe.size(); ++i) {
        const double orig = probe.data()[i];
        probe.data()[i] = orig + eps;
        const double fp = eval(probe);
        probe.data()[i] = orig - eps;
        const double fm = eval(probe);
        probe.data()[i] = orig;
        const double fd = (fp - fm) / (2.0 * eps);
        const double a = analytic.data()[i];
        const double err = std::abs(a - fd) / std::max(1.0, std::abs(a));
        if (err > max_err) max_err = err;
    }
    return max_err;
}

}  // namespace fan
