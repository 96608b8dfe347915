#include "dcht/train/optim.hpp"

#include <cmath>

namespace dcht {

namespace {

void require_finite(const ParamMap& params) {
    for (const auto& [name, t] : params) {
        if (!t.has_grad()) continue;
        for (double g : t.grad())
            if (!std::isfinite(g)) throw NumericError("non-finite gradient for " + name);
    }
}

}  // namespace

double clip_gradients(ParamMap& params, double max_norm) {
    if (max_norm <= 0.0)
        throw std::invalid_argument("max_norm must be positive, got " + std::to_string(max_norm));
    require_finite(params);
    double sq = 0.0;
    for (const auto& [name, t] : params) {
        if (!t.has_grad()) continue;
        for (double g : t.grad()) sq += g * g;
    }
    const double norm = std::sqrt(sq);
    if (norm > max_norm) {
        const double scale = max_norm / norm;
        for (auto& [name, t] : params) {
            if (!t.has_grad()) continue;
            for (double& g : t.grad_mut()) g *= scale;
        }
    }
    return norm;
}

double lr_schedule(int64_t step, int64_t d_model, int64_t warmup, double scale) {
    if (step < 1) throw std::invalid_argument("step counts from 1, got " + std::to_string(step));
    if (d_model < 1 || warmup < 1)
        throw std::invalid_argument("d_model and warmup must be positive");
    const double s = static_cast<double>(step);
    const double w = static_cast<double>(warmup);
    return scale / std::sqrt(static_cast<double>(d_model)) *
           std::min(1.0 / std::sqrt(s), s / (w * std::sqrt(w)));
}

void Adam::step(ParamMap& params, double lr) {
    if (!std::isfinite(lr) || lr < 0.0)
        throw std::invalid_argument("learning rate must be finite and non-negative");
    if (t_ == 0) {
        names_.reserve(params.size());
        m_.reserve(params.size());
        v_.reserve(params.size());
        for (const auto& [name, t] : params) {
            names_.push_back(name);
            m_.emplace_back(t.size(), 0.0);
            v_.emplace_back(t.size(), 0.0);
        }
    } else if (params.size() != names_.size()) {
        throw std::invalid_argument("parameter list changed size between steps");
    }
    require_finite(params);

    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (size_t i = 0; i < params.size(); ++i) {
        auto& [name, t] = params[i];
        if (name != names_[i] || static_cast<size_t>(t.size()) != m_[i].size())
            throw std::invalid_argument("parameter " + name + " does not match optimizer slot " +
                                        names_[i]);
        if (!t.has_grad()) continue;
        const std::vector<double>& g = t.grad();
        double* x = t.data();
        for (size_t j = 0; j < g.size(); ++j) {
            m_[i][j] = cfg_.beta1 * m_[i][j] + (1.0 - cfg_.beta1) * g[j];
            v_[i][j] = cfg_.beta2 * v_[i][j] + (1.0 - cfg_.beta2) * g[j] * g[j];
            const double mhat = m_[i][j] / bc1;
            const double vhat = v_[i][j] / bc2;
            x[j] -= lr * mhat / (std::sqrt(vhat) + cfg_.eps);
        }
    }
}

}  // namespace dcht
