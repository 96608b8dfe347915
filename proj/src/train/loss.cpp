#include "dcht/train/loss.hpp"

namespace dcht {

void LossWeights::validate() const {
    if (!(alpha >= 0.0 && alpha <= 1.0))
        throw std::invalid_argument("alpha must lie in [0, 1], got " + std::to_string(alpha));
}

Tensor loss_tf(const ComplexTensor& clean_spec, const ComplexTensor& est_spec) {
    if (clean_spec.shape() != est_spec.shape())
        throw std::invalid_argument("loss_tf shape mismatch: " + shape_str(clean_spec.shape()) +
                                    " vs " + shape_str(est_spec.shape()));
    Tensor dr = absval(sub(absval(clean_spec.re), absval(est_spec.re)));
    Tensor di = absval(sub(absval(clean_spec.im), absval(est_spec.im)));
    return mean(add(dr, di));
}

Tensor loss_t(const Tensor& clean, const Tensor& est, const Tensor& noisy) {
    if (clean.shape() != est.shape() || clean.shape() != noisy.shape())
        throw std::invalid_argument("loss_t length mismatch: clean " + shape_str(clean.shape()) +
                                    ", est " + shape_str(est.shape()) + ", noisy " +
                                    shape_str(noisy.shape()));
    Tensor speech_err = mean(absval(sub(clean, est)));
    Tensor noise = sub(noisy, clean);
    Tensor noise_est = sub(noisy, est);
    Tensor noise_err = mean(absval(sub(noise, noise_est)));
    return add(speech_err, noise_err);
}

double energy_alpha(const Tensor& clean, int64_t frame, int64_t hop) {
    NoTapeScope no_tape;
    ComplexTensor spec = stft(clean, frame, hop);
    double e_spec = mean(add(absval(spec.re), absval(spec.im))).item();
    double e_time = 2.0 * mean(absval(clean)).item();
    double denom = e_spec + e_time;
    return denom > 0.0 ? e_spec / denom : 0.5;
}

Tensor loss_total(const Tensor& clean, const Tensor& est, const Tensor& noisy,
                  const LossWeights& w, int64_t frame, int64_t hop) {
    w.validate();
    double alpha = w.energy_mode ? energy_alpha(clean, frame, hop) : w.alpha;
    if (alpha == 0.0) return loss_t(clean, est, noisy);
    Tensor tf = loss_tf(stft(clean, frame, hop), stft(est, frame, hop));
    if (alpha == 1.0) return tf;
    return add(mul(tf, alpha), mul(loss_t(clean, est, noisy), 1.0 - alpha));
}

}  // namespace dcht
