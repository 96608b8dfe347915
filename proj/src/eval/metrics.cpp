#include "dcht/eval/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "dcht/train/checkpoint.hpp"
#include "dcht/train/config.hpp"

namespace dcht {

namespace {

// 10*log10(signal/error) clamped to [-100, 100]; the upper cap fires before
// the division so a zero-error estimate never produces an infinity.
double ratio_db(double signal, double error) {
    if (signal <= 0.0) return -100.0;
    if (error <= 1e-20 * signal) return 100.0;
    const double db = 10.0 * std::log10(signal / error);
    return std::min(100.0, std::max(-100.0, db));
}

void check_pair(const std::vector<double>& clean, const std::vector<double>& est) {
    if (clean.size() != est.size())
        throw std::invalid_argument("sdr: length mismatch (" + std::to_string(clean.size()) +
                                    " vs " + std::to_string(est.size()) + ")");
    double energy = 0.0;
    for (double v : clean) energy += v * v;
    if (energy <= 0.0) throw DataError("sdr: silent reference signal");
}

}  // namespace

double sdr(const std::vector<double>& clean, const std::vector<double>& est) {
    check_pair(clean, est);
    double es = 0.0, ee = 0.0;
    for (size_t i = 0; i < clean.size(); ++i) {
        es += clean[i] * clean[i];
        const double d = clean[i] - est[i];
        ee += d * d;
    }
    return ratio_db(es, ee);
}

double si_sdr(const std::vector<double>& clean, const std::vector<double>& est) {
    check_pair(clean, est);
    double dot = 0.0, cc = 0.0;
    for (size_t i = 0; i < clean.size(); ++i) {
        dot += est[i] * clean[i];
        cc += clean[i] * clean[i];
    }
    const double a = dot / cc;
    double es = 0.0, ee = 0.0;
    for (size_t i = 0; i < clean.size(); ++i) {
        const double t = a * clean[i];
        es += t * t;
        const double d = est[i] - t;
        ee += d * d;
    }
    return ratio_db(es, ee);
}

std::string EvalReport::to_csv() const {
    std::string out = "name,sdr_in_db,sdr_out_db,delta_db,seconds\n";
    char line[256];
    for (const EvalRow& r : rows) {
        std::snprintf(line, sizeof(line), ",%.6f,%.6f,%.6f,%.6f\n", r.sdr_in, r.sdr_out, r.delta,
                      r.seconds);
        out += r.name;
        out += line;
    }
    return out;
}

void EvalReport::print_table(std::ostream& out) const {
    size_t width = 4;
    for (const EvalRow& r : rows) width = std::max(width, r.name.size());
    char line[256];
    std::snprintf(line, sizeof(line), "%-*s  %10s  %10s  %10s  %8s\n", static_cast<int>(width),
                  "name", "sdr_in", "sdr_out", "delta", "seconds");
    out << line;
    for (const EvalRow& r : rows) {
        std::snprintf(line, sizeof(line), "%-*s  %10.3f  %10.3f  %10.3f  %8.3f\n",
                      static_cast<int>(width), r.name.c_str(), r.sdr_in, r.sdr_out, r.delta,
                      r.seconds);
        out << line;
    }
    std::snprintf(line, sizeof(line), "%-*s  %10.3f  %10.3f  %10.3f\n", static_cast<int>(width),
                  "mean", mean_sdr_in, mean_sdr_out, mean_delta);
    out << line;
    out << "config " << config_digest;
    if (!checkpoint_digest.empty()) out << "  checkpoint " << checkpoint_digest;
    out << "\n";
}

EvalReport evaluate(const DchtModel& model, BranchMode mode, const std::vector<ClipPair>& pairs) {
    if (pairs.empty()) throw DataError("evaluate: empty dataset");
    NoTapeScope no_tape;
    EvalReport report;
    report.config_digest = fnv1a_hex(to_json_text(model.cfg));
    Rng rng(0);  // eval mode never draws from it
    for (const ClipPair& p : pairs) {
        Tensor noisy = Tensor::from_vector({static_cast<int64_t>(p.noisy.size())}, p.noisy);
        Tensor enhanced = model.forward(noisy, mode, false, rng);
        EvalRow row;
        row.name = p.name;
        row.sdr_in = sdr(p.clean, p.noisy);
        row.sdr_out = sdr(p.clean, enhanced.values());
        row.delta = row.sdr_out - row.sdr_in;
        row.seconds = static_cast<double>(p.clean.size()) / model.cfg.sample_rate;
        report.rows.push_back(std::move(row));
    }
    for (const EvalRow& r : report.rows) {
        report.mean_sdr_in += r.sdr_in;
        report.mean_sdr_out += r.sdr_out;
        report.mean_delta += r.delta;
    }
    const double n = static_cast<double>(report.rows.size());
    report.mean_sdr_in /= n;
    report.mean_sdr_out /= n;
    report.mean_delta /= n;
    return report;
}

}  // namespace dcht
