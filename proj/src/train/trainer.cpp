#include "dcht/train/trainer.hpp"

#include <cmath>
#include <numeric>

namespace dcht {

namespace {

ParamMap snapshot(const ParamMap& params) {
    ParamMap out;
    out.reserve(params.size());
    for (const auto& [name, t] : params) out.emplace_back(name, t.clone());
    return out;
}

int64_t min_clip_length(const DchtConfig& cfg) {
    const bool spectral =
        cfg.fusion == BranchMode::Both || cfg.fusion == BranchMode::Spectral;
    const bool temporal =
        cfg.fusion == BranchMode::Both || cfg.fusion == BranchMode::Temporal;
    int64_t need = 1;
    if (spectral) need = std::max(need, cfg.frame / 2 + 1);
    if (temporal) need = std::max(need, cfg.temporal.enc_kernel);
    return need;
}

void check_lengths(const DchtConfig& cfg, const std::vector<ClipPair>& set, const char* which) {
    const int64_t need = min_clip_length(cfg);
    for (const ClipPair& p : set) {
        if (static_cast<int64_t>(p.noisy.size()) < need)
            throw DataError(std::string(which) + " clip " + p.name + " has " +
                            std::to_string(p.noisy.size()) + " samples, need at least " +
                            std::to_string(need));
    }
}

}  // namespace

double dataset_loss(const DchtModel& model, const LossWeights& weights,
                    const std::vector<ClipPair>& set) {
    if (set.empty()) throw DataError("empty evaluation set");
    NoTapeScope no_tape;
    Rng unused(0);
    double total = 0.0;
    for (const ClipPair& p : set) {
        const int64_t n = static_cast<int64_t>(p.noisy.size());
        Tensor x = Tensor::from_vector({n}, p.noisy);
        Tensor y = Tensor::from_vector({n}, p.clean);
        Tensor est = model.forward(x, false, unused);
        total += loss_total(y, est, x, weights, model.cfg.frame, model.cfg.hop).item();
    }
    return total / static_cast<double>(set.size());
}

TrainResult train(const TrainConfig& cfg, const std::vector<ClipPair>& train_set,
                  const std::vector<ClipPair>& val_set, std::ostream* log) {
    cfg.validate();
    if (train_set.empty()) throw DataError("empty training set");
    check_lengths(cfg.model, train_set, "training");
    check_lengths(cfg.model, val_set, "validation");

    Rng master(cfg.seed);
    Rng init_rng(master.bits());
    Rng shuffle_rng(master.bits());
    Rng drop_rng(master.bits());

    TrainResult res{DchtModel(cfg.model, init_rng), {}, {}};
    DchtModel& model = res.model;
    ParamMap params = model.parameters(cfg.model.fusion);

    Adam opt;
    int64_t step = 0;
    bool stop = false;
    std::vector<size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), size_t{0});

    for (int64_t epoch = 1; epoch <= cfg.epochs && !stop; ++epoch) {
        for (size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[shuffle_rng.integer(i)]);

        for (size_t at = 0; at < order.size() && !stop; at += cfg.batch) {
            const size_t take = std::min<size_t>(cfg.batch, order.size() - at);
            Tape tape;
            TapeScope scope(tape);
            for (auto& [name, t] : params) t.zero_grad();

            Tensor total;
            for (size_t i = at; i < at + take; ++i) {
                const ClipPair& clip = train_set[order[i]];
                const int64_t n = static_cast<int64_t>(clip.noisy.size());
                Tensor x = Tensor::from_vector({n}, clip.noisy);
                Tensor y = Tensor::from_vector({n}, clip.clean);
                Tensor est = model.forward(x, true, drop_rng);
                Tensor l = loss_total(y, est, x, cfg.loss, cfg.model.frame, cfg.model.hop);
                total = total.defined() ? add(total, l) : l;
            }
            Tensor batch_loss = mul(total, 1.0 / static_cast<double>(take));
            const double loss_value = batch_loss.item();
            ++step;
            if (!std::isfinite(loss_value))
                throw NumericError("non-finite training loss at step " + std::to_string(step));

            tape.backward(batch_loss);
            const double grad_norm = clip_gradients(params, cfg.clip_norm);
            const double lr = lr_schedule(step, cfg.schedule_dim(), cfg.warmup, cfg.lr_scale);
            opt.step(params, lr);

            res.history.steps.push_back({step, loss_value, lr, grad_norm});
            if (log)
                *log << "step " << step << "  loss " << loss_value << "  lr " << lr
                     << "  grad_norm " << grad_norm << "\n";
            if (cfg.max_steps > 0 && step >= cfg.max_steps) stop = true;
        }

        if (!val_set.empty()) {
            const double vl = dataset_loss(model, cfg.loss, val_set);
            res.history.val_losses.push_back(vl);
            if (vl < res.history.best_val) {
                res.history.best_val = vl;
                res.history.best_epoch = epoch;
                res.best_params = snapshot(params);
            }
            if (log) *log << "epoch " << epoch << "  val_loss " << vl << "\n";
        }
    }

    if (res.best_params.empty()) res.best_params = snapshot(params);
    return res;
}

}  // namespace dcht
