#ifndef GV95_ANALYSIS_HPP
#define GV95_ANALYSIS_HPP

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace gv95 {

/// One integration bin of raw detector counts (1 s wide by default),
/// annotated with the sent state and the lock residual over the bin.
struct BinRecord {
    double t_start = 0.0;           // [s]
    std::int64_t counts_d0 = 0;
    std::int64_t counts_d1 = 0;
    int sent_state = 0;             // 0 or 1
    double lock_residual_rms = 0.0; // quantum-channel phase error RMS [rad]
};

struct ValueWithSigma {
    double value = 0.0;
    double sigma = 0.0;
};

/// Per-sent-state estimates. "correct" is the detector the state maps to
/// under the aligned convention (state 0 -> D0, state 1 -> D1).
struct StateStats {
    std::int64_t counts_correct = 0;
    std::int64_t counts_wrong = 0;
    double duration = 0.0;          // total integration time for this state [s]
    ValueWithSigma v_raw;
    ValueWithSigma v_net;
    ValueWithSigma qber_raw;
    double v_raw_bin_scatter = 0.0; // std of per-bin visibility, for comparison
    bool net_clamped = false;       // dark subtraction hit zero somewhere
};

struct RunStats {
    StateStats per_state[2];
    ValueWithSigma qber_dark_equalized;
    double dark_rate_d0 = 0.0;      // [counts/s] used for corrections
    double dark_rate_d1 = 0.0;
    std::int64_t total_bins = 0;
    double mean_cos_phase = 1.0;    // over the whole run
    double lock_rms = 0.0;          // [rad]
    double lock_slip_fraction = 0.0;
};

/// Fringe contrast from correct/wrong counts: (c - w) / (c + w).
/// Throws std::domain_error when the total is zero.
double visibility(double c_correct, double c_wrong);

/// Visibility after removing the expected dark counts from both detectors.
/// Subtracted counts are clamped at zero (sets *clamped when provided).
double net_visibility(double c_correct, double c_wrong, double dark_rate_correct,
                      double dark_rate_wrong, double duration,
                      bool* clamped = nullptr);

/// Quantum bit error rate n_wrong / (n_wrong + n_right).
/// Throws std::domain_error when the total is zero.
double qber(double n_wrong, double n_right);

/// The dark-equalization correction: recompute counts as if D1 had the same
/// dark rate as D0 (subtract (dark_d1 - dark_d0) * bin_width from every D1
/// count), then pool the per-state QBERs weighted by their corrected totals.
/// Requires dark_d1 >= dark_d0.
double qber_dark_equalized(std::span<const BinRecord> bins, double dark_d0,
                           double dark_d1, double bin_width);

/// First-order Poisson error propagation for an arbitrary statistic of raw
/// counts: sigma^2 = sum_i (df/dn_i)^2 * n_i, derivatives by central
/// differences of one count.
double poisson_sigma(const std::function<double(std::span<const double>)>& f,
                     std::span<const double> counts);

/// Closed forms for the two statistics used throughout.
double visibility_sigma(double c_correct, double c_wrong);
double qber_sigma(double n_wrong, double n_right);

/// Aggregate per-gate click events (or add rate-sampled counts) into fixed
/// bins. Events are (t, detector) pairs; see session.cpp for the streaming
/// equivalent used by the engines.
std::vector<BinRecord> bin_series(std::span<const double> t_clicks_d0,
                                  std::span<const double> t_clicks_d1,
                                  const std::function<int(double)>& sent_state_at,
                                  double duration, double bin_width);

/// Calibration oracle: per-state signal rates solved from a raw/net
/// visibility pair given the dark rates at the correct and wrong detector.
/// Returns the correct- and wrong-detector signal rates [counts/s].
struct CalibratedRates {
    double signal_correct = 0.0;
    double signal_wrong = 0.0;
    double total() const { return signal_correct + signal_wrong; }
};
CalibratedRates calibrate_rates(double v_raw, double v_net, double dark_rate_correct,
                                double dark_rate_wrong);

/// Full run statistics from binned counts. bin_width is needed for the dark
/// subtractions; dark rates are counts/s.
RunStats compute_run_stats(std::span<const BinRecord> bins, double dark_rate_d0,
                           double dark_rate_d1, double bin_width);

} // namespace gv95

#endif
