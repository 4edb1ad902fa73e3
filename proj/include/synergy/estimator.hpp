#pragma once

// Variational estimation of conditional entropies and synergy with
// trainable softmax predictors, optimized by plain full-batch gradient
// descent so that every trajectory is reproducible to the bit. Population
// mode minimizes the exact expected cross-entropy over a finite joint;
// sampled mode first replaces the joint by an empirical table built from
// seeded draws and then proceeds identically.
//
// Also home to the toy controlled experiment: a linear bottleneck encoder
// with an equivariance head and a class head, trained jointly, with the
// class loss added, detached, or adversarially subtracted.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "synergy/errors.hpp"
#include "synergy/info.hpp"
#include "synergy/joint_table.hpp"
#include "synergy/rng.hpp"
#include "synergy/zoo.hpp"

namespace synergy {

struct TrainConfig {
    double step_size = 0.3;
    int steps = 5000;
    double lambda1 = 0.5;  // joint-loss weight
    double lambda2 = 9.0;  // adversarial weight
    std::uint64_t seed = 0;
    enum class Mode { population, sampled } mode = Mode::population;
    std::size_t samples = 10000;  // draws in sampled mode
    int bottleneck = 8;           // encoder width of the controlled experiment

    void validate() const {
        if (!(step_size > 0.0)) throw usage_error("TrainConfig: step_size must be positive");
        if (steps < 1) throw usage_error("TrainConfig: steps must be at least 1");
        if (lambda1 < 0.0 || lambda2 < 0.0) throw usage_error("TrainConfig: negative loss weight");
        if (mode == Mode::sampled && samples == 0)
            throw usage_error("TrainConfig: sampled mode needs samples");
        if (bottleneck < 1) throw usage_error("TrainConfig: bottleneck must be at least 1");
    }
};

// Linear-softmax predictor of a target variable from a side configuration.
// With no explicit feature map the side configuration is one-hot, and the
// weight matrix is simply a logit table per configuration.
struct SoftmaxPredictor {
    std::vector<std::size_t> side_sizes;        // alphabet sizes, caller order
    std::size_t n_classes = 0;
    std::vector<std::vector<double>> features;  // per flat side config; empty = one-hot
    std::vector<double> w;                      // n_features x n_classes, row-major
    std::vector<double> bias;                   // n_classes

    std::size_t side_configs() const {
        std::size_t n = 1;
        for (std::size_t s : side_sizes) n *= s;
        return n;
    }
    std::size_t n_features() const {
        return features.empty() ? side_configs() : features.front().size();
    }

    // softmax output for one flat side configuration
    std::vector<double> predict(std::size_t side_flat) const {
        if (side_flat >= side_configs()) throw usage_error("SoftmaxPredictor: side index out of range");
        std::vector<double> logits(bias);
        if (features.empty()) {
            for (std::size_t k = 0; k < n_classes; ++k) logits[k] += w[side_flat * n_classes + k];
        } else {
            const auto& phi = features[side_flat];
            for (std::size_t m = 0; m < phi.size(); ++m)
                for (std::size_t k = 0; k < n_classes; ++k) logits[k] += phi[m] * w[m * n_classes + k];
        }
        const double top = *std::max_element(logits.begin(), logits.end());
        double z = 0.0;
        for (double& v : logits) z += (v = std::exp(v - top));
        for (double& v : logits) v /= z;
        return logits;
    }
};

namespace detail {

// Population cross-entropy objective for a linear-softmax predictor:
// exact expected CE of predicting `target` from the side configuration,
// with probabilities laid out as p[side_flat * n_classes + y]. Parameters
// travel as one flat vector, weights first and the bias in the last
// n_classes slots.
struct CeProblem {
    std::size_t n_side = 0;
    std::size_t n_classes = 0;
    std::vector<double> p;                      // side x class, sums to 1
    std::vector<double> p_side;                 // row sums
    std::vector<std::vector<double>> features;  // empty = one-hot

    std::size_t n_features() const { return features.empty() ? n_side : features.front().size(); }
    std::size_t n_params() const { return (n_features() + 1) * n_classes; }

    double shannon() const {
        double h = 0.0;
        for (std::size_t s = 0; s < n_side; ++s)
            for (std::size_t k = 0; k < n_classes; ++k) {
                const double q = p[s * n_classes + k];
                if (q > 0.0) h -= q * std::log(q / p_side[s]);
            }
        return h < 0.0 ? 0.0 : h;
    }

    void logits_for(const std::vector<double>& theta, std::size_t s, std::vector<double>& out) const {
        const std::size_t b0 = n_features() * n_classes;
        out.assign(theta.begin() + b0, theta.begin() + b0 + n_classes);
        if (features.empty()) {
            for (std::size_t k = 0; k < n_classes; ++k) out[k] += theta[s * n_classes + k];
        } else {
            const auto& phi = features[s];
            for (std::size_t m = 0; m < phi.size(); ++m)
                for (std::size_t k = 0; k < n_classes; ++k) out[k] += phi[m] * theta[m * n_classes + k];
        }
    }

    double loss(const std::vector<double>& theta) const {
        double total = 0.0;
        std::vector<double> logits;
        for (std::size_t s = 0; s < n_side; ++s) {
            if (p_side[s] <= 0.0) continue;
            logits_for(theta, s, logits);
            const double top = *std::max_element(logits.begin(), logits.end());
            double z = 0.0;
            for (double v : logits) z += std::exp(v - top);
            const double log_z = std::log(z) + top;
            for (std::size_t k = 0; k < n_classes; ++k) {
                const double q = p[s * n_classes + k];
                if (q > 0.0) total -= q * (logits[k] - log_z);
            }
        }
        return total;
    }

    void grad(const std::vector<double>& theta, std::vector<double>& g) const {
        g.assign(theta.size(), 0.0);
        const std::size_t b0 = n_features() * n_classes;
        std::vector<double> logits;
        for (std::size_t s = 0; s < n_side; ++s) {
            if (p_side[s] <= 0.0) continue;
            logits_for(theta, s, logits);
            const double top = *std::max_element(logits.begin(), logits.end());
            double z = 0.0;
            for (double& v : logits) z += (v = std::exp(v - top));
            for (std::size_t k = 0; k < n_classes; ++k) {
                const double delta = p_side[s] * logits[k] / z - p[s * n_classes + k];
                g[b0 + k] += delta;
                if (features.empty()) {
                    g[s * n_classes + k] += delta;
                } else {
                    const auto& phi = features[s];
                    for (std::size_t m = 0; m < phi.size(); ++m) g[m * n_classes + k] += phi[m] * delta;
                }
            }
        }
    }
};

// Projects the joint onto (side configuration, target). Side variables
// keep the caller's order, first variable most significant.
inline CeProblem make_problem(const JointTable& joint, const std::string& target,
                              const std::vector<std::string>& side,
                              std::vector<std::vector<double>> features = {}) {
    for (const auto& s : side)
        if (s == target) throw usage_error("fit: target appears in the side set");
    const std::size_t ti = joint.var_index(target);
    const auto side_idx = joint.var_indices(side);

    CeProblem prob;
    prob.n_classes = joint.vars()[ti].size();
    prob.n_side = 1;
    for (std::size_t i : side_idx) prob.n_side *= joint.vars()[i].size();
    prob.p.assign(prob.n_side * prob.n_classes, 0.0);
    const auto& raw = joint.probs();
    for (std::size_t cell = 0; cell < raw.size(); ++cell) {
        if (raw[cell] == 0.0) continue;
        std::size_t s = 0;
        for (std::size_t i : side_idx) s = s * joint.vars()[i].size() + joint.symbol_at(cell, i);
        prob.p[s * prob.n_classes + joint.symbol_at(cell, ti)] += raw[cell];
    }
    prob.p_side.assign(prob.n_side, 0.0);
    for (std::size_t s = 0; s < prob.n_side; ++s)
        for (std::size_t k = 0; k < prob.n_classes; ++k) prob.p_side[s] += prob.p[s * prob.n_classes + k];

    if (!features.empty()) {
        if (features.size() != prob.n_side)
            throw usage_error("fit: one feature vector per side configuration expected");
        for (const auto& f : features)
            if (f.size() != features.front().size() || f.empty())
                throw usage_error("fit: feature vectors must share a positive dimension");
        prob.features = std::move(features);
    }
    return prob;
}

// Seeded empirical counterpart of a joint: n draws by CDF inversion.
inline JointTable empirical_table(const JointTable& joint, std::size_t n, std::uint64_t seed) {
    if (n == 0) throw usage_error("empirical_table: need at least one draw");
    const auto& p = joint.probs();
    std::vector<double> cdf(p.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) cdf[i] = (acc += p[i]);
    cdf.back() = 1.0;  // guard the tail against rounding

    std::mt19937_64 gen(seed);
    std::vector<double> counts(p.size(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double u = uniform01(gen);
        const std::size_t cell = static_cast<std::size_t>(
            std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
        counts[std::min(cell, p.size() - 1)] += 1.0;
    }
    for (double& c : counts) c /= static_cast<double>(n);
    return JointTable(joint.vars(), std::move(counts));
}

// Shared descent loop with the divergence rule: ten consecutive loss
// increases (or a non-finite loss) point at the step size.
inline double descend(const CeProblem& prob, std::vector<double>& w, double step_size, int steps) {
    std::vector<double> g;
    double prev = prob.loss(w);
    int rising = 0;
    for (int step = 0; step < steps; ++step) {
        prob.grad(w, g);
        for (std::size_t i = 0; i < w.size(); ++i) w[i] -= step_size * g[i];
        const double cur = prob.loss(w);
        if (!std::isfinite(cur)) throw step_size_error("fit: loss diverged to non-finite");
        if (cur > prev) {
            if (++rising >= 10) throw step_size_error("fit: loss rose 10 consecutive steps");
        } else {
            rising = 0;
        }
        prev = cur;
    }
    return prev;
}

}  // namespace detail

struct FitResult {
    SoftmaxPredictor predictor;
    double final_ce = 0.0;
};

// Trains a linear-softmax predictor of `target` from `side` and returns
// the achieved cross-entropy. Weights start at zero (the uniform
// predictor), which is the convex problem's canonical start.
inline FitResult fit_predictor(const JointTable& joint, const std::string& target,
                               const std::vector<std::string>& side, const TrainConfig& config,
                               std::vector<std::vector<double>> features = {}) {
    config.validate();
    const JointTable* data = &joint;
    JointTable empirical({Alphabet{"_", {"0"}}}, {1.0});
    if (config.mode == TrainConfig::Mode::sampled) {
        empirical = detail::empirical_table(joint, config.samples, config.seed);
        data = &empirical;
    }
    detail::CeProblem prob = detail::make_problem(*data, target, side, std::move(features));

    std::vector<double> theta(prob.n_params(), 0.0);
    const double final_ce = detail::descend(prob, theta, config.step_size, config.steps);
    if (final_ce < prob.shannon() - 1e-9)
        throw numerical_error("fit: cross-entropy fell below the Shannon floor");

    FitResult r;
    r.final_ce = final_ce;
    for (std::size_t i : data->var_indices(side))
        r.predictor.side_sizes.push_back(data->vars()[i].size());
    r.predictor.n_classes = prob.n_classes;
    r.predictor.features = prob.features;
    const std::size_t b0 = prob.n_features() * prob.n_classes;
    r.predictor.w.assign(theta.begin(), theta.begin() + b0);
    r.predictor.bias.assign(theta.begin() + b0, theta.end());
    return r;
}

struct VariationalEstimate {
    double i_hat = 0.0;
    double ce_without = 0.0;  // CE of predicting the target from X alone
    double ce_with = 0.0;     // CE with the class appended to the side
};

// Appendix-style synergy estimate: the drop in cross-entropy when the
// class variable joins the side information. In sampled mode one sample
// set is drawn and shared by both fits.
inline VariationalEstimate estimate_synergy_variational(const JointTable& joint,
                                                        const TrainConfig& config,
                                                        const std::string& a = "A",
                                                        const std::string& c = "C",
                                                        const std::string& x = "X") {
    config.validate();
    const JointTable* data = &joint;
    JointTable empirical({Alphabet{"_", {"0"}}}, {1.0});
    TrainConfig sub = config;
    if (config.mode == TrainConfig::Mode::sampled) {
        empirical = detail::empirical_table(joint, config.samples, config.seed);
        data = &empirical;
        sub.mode = TrainConfig::Mode::population;
    }
    VariationalEstimate r;
    r.ce_without = fit_predictor(*data, a, {x}, sub).final_ce;
    r.ce_with = fit_predictor(*data, a, {x, c}, sub).final_ce;
    r.i_hat = r.ce_without - r.ce_with;
    return r;
}

// Central finite differences against the analytic gradient at the
// predictor's current weights; 64 seeded coordinates, h = 1e-5. Returns
// the worst relative error and throws if it exceeds 1e-4.
inline double gradient_check(const SoftmaxPredictor& predictor, const JointTable& joint,
                             const std::string& target, const std::vector<std::string>& side,
                             std::uint64_t seed = 12345) {
    detail::CeProblem prob = detail::make_problem(joint, target, side, predictor.features);
    if (predictor.w.size() != prob.n_features() * prob.n_classes ||
        predictor.bias.size() != prob.n_classes)
        throw usage_error("gradient_check: parameter shape does not match the problem");

    std::vector<double> theta = predictor.w;
    theta.insert(theta.end(), predictor.bias.begin(), predictor.bias.end());
    std::vector<double> g;
    prob.grad(theta, g);
    const double h = 1e-5;
    std::mt19937_64 gen(seed);
    double worst = 0.0;
    for (int trial = 0; trial < 64; ++trial) {
        const std::size_t i = static_cast<std::size_t>(uniform_below(gen, theta.size()));
        const double keep = theta[i];
        theta[i] = keep + h;
        const double up = prob.loss(theta);
        theta[i] = keep - h;
        const double down = prob.loss(theta);
        theta[i] = keep;
        const double fd = (up - down) / (2.0 * h);
        const double rel = std::abs(g[i] - fd) / std::max({std::abs(g[i]), std::abs(fd), 1e-6});
        worst = std::max(worst, rel);
    }
    if (worst > 1e-4)
        throw numerical_error("gradient_check: relative error " + std::to_string(worst));
    return worst;
}

// ---- controlled experiment ----------------------------------------------

enum class Variant { baseline, plus_cls, minus_cls };

inline Variant parse_variant(const std::string& name) {
    if (name == "baseline") return Variant::baseline;
    if (name == "plus_cls") return Variant::plus_cls;
    if (name == "minus_cls") return Variant::minus_cls;
    throw name_error("unknown variant '" + name + "'");
}

struct CurvePoint {
    int step = 0;
    double loss_equiv = 0.0;
    double loss_cls = 0.0;
    double acc_equiv = 0.0;
    double acc_cls = 0.0;
};

struct ControlledResult {
    double equiv_accuracy = 0.0;
    double cls_accuracy = 0.0;
    std::vector<CurvePoint> curve;
};

namespace detail {

inline std::size_t argmax_lowest(const std::vector<double>& v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] > v[best]) best = i;
    return best;
}

// Two-head linear model: observation features through a width-d encoder.
// The encoder weights are shared across observations, so pressure on the
// class head reshapes the same map the equivariance head reads from.
struct TwoHeadModel {
    std::size_t nf = 0, d = 0, na = 0, nc = 0;
    std::vector<double> enc;     // nf x d
    std::vector<double> head_a;  // d x na
    std::vector<double> head_c;  // d x nc

    void init(std::uint64_t seed) {
        std::mt19937_64 gen(seed);
        for (double& v : enc) v = 0.1 * standard_normal(gen);
        for (double& v : head_a) v = 0.1 * standard_normal(gen);
        for (double& v : head_c) v = 0.1 * standard_normal(gen);
    }
};

struct TwoHeadEval {
    double loss_a = 0.0, loss_c = 0.0;
    double acc_a = 0.0, acc_c = 0.0;
    // gradients, same shapes as the model pieces they refer to
    std::vector<double> g_enc_from_a, g_enc_from_c, g_head_a, g_head_c;
};

// One full population forward/backward pass over every X symbol. phi holds
// one feature row per symbol, aligned with the X alphabet.
inline TwoHeadEval evaluate(const TwoHeadModel& m, const std::vector<std::vector<double>>& phi,
                            const std::vector<double>& p_x, const std::vector<double>& p_xa,
                            const std::vector<double>& p_xc) {
    TwoHeadEval e;
    e.g_enc_from_a.assign(m.enc.size(), 0.0);
    e.g_enc_from_c.assign(m.enc.size(), 0.0);
    e.g_head_a.assign(m.head_a.size(), 0.0);
    e.g_head_c.assign(m.head_c.size(), 0.0);

    std::vector<double> r(m.d), gr_a(m.d), gr_c(m.d);
    std::vector<double> za(m.na), pi_a(m.na), zc(m.nc), pi_c(m.nc);
    for (std::size_t x = 0; x < phi.size(); ++x) {
        if (p_x[x] <= 0.0) continue;
        const std::vector<double>& f = phi[x];
        for (std::size_t j = 0; j < m.d; ++j) {
            double s = 0.0;
            for (std::size_t i = 0; i < m.nf; ++i) s += f[i] * m.enc[i * m.d + j];
            r[j] = s;
        }

        for (std::size_t k = 0; k < m.na; ++k) {
            double z = 0.0;
            for (std::size_t j = 0; j < m.d; ++j) z += r[j] * m.head_a[j * m.na + k];
            za[k] = z;
        }
        double top = *std::max_element(za.begin(), za.end());
        double zsum = 0.0;
        for (std::size_t k = 0; k < m.na; ++k) zsum += (pi_a[k] = std::exp(za[k] - top));
        const double log_za = std::log(zsum) + top;
        for (double& v : pi_a) v /= zsum;

        for (std::size_t k = 0; k < m.nc; ++k) {
            double z = 0.0;
            for (std::size_t j = 0; j < m.d; ++j) z += r[j] * m.head_c[j * m.nc + k];
            zc[k] = z;
        }
        top = *std::max_element(zc.begin(), zc.end());
        zsum = 0.0;
        for (std::size_t k = 0; k < m.nc; ++k) zsum += (pi_c[k] = std::exp(zc[k] - top));
        const double log_zc = std::log(zsum) + top;
        for (double& v : pi_c) v /= zsum;

        std::fill(gr_a.begin(), gr_a.end(), 0.0);
        std::fill(gr_c.begin(), gr_c.end(), 0.0);
        for (std::size_t k = 0; k < m.na; ++k) {
            const double q = p_xa[x * m.na + k];
            if (q > 0.0) e.loss_a -= q * (za[k] - log_za);
            const double delta = p_x[x] * pi_a[k] - q;
            for (std::size_t j = 0; j < m.d; ++j) {
                e.g_head_a[j * m.na + k] += r[j] * delta;
                gr_a[j] += m.head_a[j * m.na + k] * delta;
            }
        }
        for (std::size_t k = 0; k < m.nc; ++k) {
            const double q = p_xc[x * m.nc + k];
            if (q > 0.0) e.loss_c -= q * (zc[k] - log_zc);
            const double delta = p_x[x] * pi_c[k] - q;
            for (std::size_t j = 0; j < m.d; ++j) {
                e.g_head_c[j * m.nc + k] += r[j] * delta;
                gr_c[j] += m.head_c[j * m.nc + k] * delta;
            }
        }
        for (std::size_t i = 0; i < m.nf; ++i) {
            if (f[i] == 0.0) continue;
            for (std::size_t j = 0; j < m.d; ++j) {
                e.g_enc_from_a[i * m.d + j] += f[i] * gr_a[j];
                e.g_enc_from_c[i * m.d + j] += f[i] * gr_c[j];
            }
        }

        e.acc_a += p_xa[x * m.na + argmax_lowest(pi_a)];
        e.acc_c += p_xc[x * m.nc + argmax_lowest(pi_c)];
    }
    return e;
}

// Feature row per X symbol of the family's joint, in X-alphabet order.
// featurize must factor through the observation: two (image, action) pairs
// that collide in X have to produce the same features.
inline std::vector<std::vector<double>> feature_table(const ToyDataset& dataset,
                                                      const TransformFamily& family,
                                                      const Alphabet& x_alphabet) {
    std::vector<std::vector<double>> phi(x_alphabet.size());
    std::vector<bool> seen(x_alphabet.size(), false);
    const std::size_t n_actions = family.action_space.size();
    for (const auto& item : dataset.items)
        for (std::size_t a = 0; a < n_actions; ++a) {
            const std::size_t x = x_alphabet.index_of(family.observe(item.image, a));
            std::vector<double> f = family.featurize(item.image, a);
            if (f.empty())
                throw model_error("controlled_experiment: featurize produced an empty vector");
            if (!seen[x]) {
                phi[x] = std::move(f);
                seen[x] = true;
            } else if (phi[x] != f) {
                throw model_error(
                    "controlled_experiment: featurize is not a function of the observation");
            }
        }
    for (std::size_t x = 0; x < phi.size(); ++x) {
        if (!seen[x]) throw model_error("controlled_experiment: X symbol without a feature row");
        if (phi[x].size() != phi[0].size())
            throw model_error("controlled_experiment: inconsistent feature dimensions");
    }
    return phi;
}

}  // namespace detail

// Trains the bottleneck model under one of the three regimes and reports
// the population argmax accuracy of the equivariance head.
inline ControlledResult controlled_experiment(const ToyDataset& dataset,
                                              const TransformFamily& family, Variant variant,
                                              const TrainConfig& config) {
    config.validate();
    JointTable joint = apply_transform_family(dataset, family);
    if (config.mode == TrainConfig::Mode::sampled)
        joint = detail::empirical_table(joint, config.samples, config.seed);

    const std::size_t xi = joint.var_index("X");
    const std::size_t ai = joint.var_index("A");
    const std::size_t ci = joint.var_index("C");
    const std::size_t nx = joint.vars()[xi].size();
    const std::size_t na = joint.vars()[ai].size();
    const std::size_t nc = joint.vars()[ci].size();

    std::vector<double> p_x(nx, 0.0), p_xa(nx * na, 0.0), p_xc(nx * nc, 0.0);
    const auto& raw = joint.probs();
    for (std::size_t cell = 0; cell < raw.size(); ++cell) {
        if (raw[cell] == 0.0) continue;
        const std::size_t x = joint.symbol_at(cell, xi);
        p_x[x] += raw[cell];
        p_xa[x * na + joint.symbol_at(cell, ai)] += raw[cell];
        p_xc[x * nc + joint.symbol_at(cell, ci)] += raw[cell];
    }

    const std::vector<std::vector<double>> phi =
        detail::feature_table(dataset, family, joint.vars()[xi]);

    detail::TwoHeadModel m;
    m.nf = phi[0].size();
    m.d = static_cast<std::size_t>(config.bottleneck);
    m.na = na;
    m.nc = nc;
    m.enc.assign(m.nf * m.d, 0.0);
    m.head_a.assign(m.d * m.na, 0.0);
    m.head_c.assign(m.d * m.nc, 0.0);
    m.init(config.seed);

    ControlledResult result;
    result.curve.reserve(config.steps);
    const double eta = config.step_size;
    double monitored_prev = 0.0;
    bool have_prev = false;
    int rising = 0;

    for (int step = 1; step <= config.steps; ++step) {
        if (variant == Variant::minus_cls) {
            // classifier step first, encoder frozen
            detail::TwoHeadEval cls_pass = detail::evaluate(m, phi, p_x, p_xa, p_xc);
            for (std::size_t i = 0; i < m.head_c.size(); ++i)
                m.head_c[i] -= eta * cls_pass.g_head_c[i];
            // then the encoder and equivariance head, class gradient flipped
            detail::TwoHeadEval enc_pass = detail::evaluate(m, phi, p_x, p_xa, p_xc);
            for (std::size_t i = 0; i < m.head_a.size(); ++i)
                m.head_a[i] -= eta * enc_pass.g_head_a[i];
            for (std::size_t i = 0; i < m.enc.size(); ++i)
                m.enc[i] -= eta * (enc_pass.g_enc_from_a[i] - config.lambda2 * enc_pass.g_enc_from_c[i]);
        } else {
            detail::TwoHeadEval pass = detail::evaluate(m, phi, p_x, p_xa, p_xc);
            const double cls_into_enc = (variant == Variant::plus_cls) ? config.lambda1 : 0.0;
            const double cls_head_scale = (variant == Variant::plus_cls) ? config.lambda1 : 1.0;
            for (std::size_t i = 0; i < m.head_a.size(); ++i)
                m.head_a[i] -= eta * pass.g_head_a[i];
            for (std::size_t i = 0; i < m.head_c.size(); ++i)
                m.head_c[i] -= eta * cls_head_scale * pass.g_head_c[i];
            for (std::size_t i = 0; i < m.enc.size(); ++i)
                m.enc[i] -= eta * (pass.g_enc_from_a[i] + cls_into_enc * pass.g_enc_from_c[i]);
        }

        const detail::TwoHeadEval now = detail::evaluate(m, phi, p_x, p_xa, p_xc);
        if (!std::isfinite(now.loss_a) || !std::isfinite(now.loss_c))
            throw step_size_error("controlled_experiment: loss diverged to non-finite");
        if (variant != Variant::minus_cls) {
            const double monitored =
                now.loss_a + (variant == Variant::plus_cls ? config.lambda1 * now.loss_c : 0.0);
            if (have_prev && monitored > monitored_prev) {
                if (++rising >= 10)
                    throw step_size_error("controlled_experiment: loss rose 10 consecutive steps");
            } else {
                rising = 0;
            }
            monitored_prev = monitored;
            have_prev = true;
        }
        result.curve.push_back({step, now.loss_a, now.loss_c, now.acc_a, now.acc_c});
    }

    result.equiv_accuracy = result.curve.back().acc_equiv;
    result.cls_accuracy = result.curve.back().acc_cls;
    return result;
}

}  // namespace synergy
