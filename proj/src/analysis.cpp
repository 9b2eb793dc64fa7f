#include "gv95/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gv95 {

double visibility(double c_correct, double c_wrong) {
    if (c_correct < 0.0 || c_wrong < 0.0)
        throw std::invalid_argument("visibility: negative counts");
    double total = c_correct + c_wrong;
    if (total <= 0.0)
        throw std::domain_error("visibility: zero total counts");
    return (c_correct - c_wrong) / total;
}

double net_visibility(double c_correct, double c_wrong, double dark_rate_correct,
                      double dark_rate_wrong, double duration, bool* clamped) {
    double nc = c_correct - dark_rate_correct * duration;
    double nw = c_wrong - dark_rate_wrong * duration;
    bool clip = false;
    if (nc < 0.0) { nc = 0.0; clip = true; }
    if (nw < 0.0) { nw = 0.0; clip = true; }
    if (clamped) *clamped = clip;
    return visibility(nc, nw);
}

double qber(double n_wrong, double n_right) {
    if (n_wrong < 0.0 || n_right < 0.0)
        throw std::invalid_argument("qber: negative counts");
    double total = n_wrong + n_right;
    if (total <= 0.0)
        throw std::domain_error("qber: zero total counts");
    return n_wrong / total;
}

namespace {

struct EqualizedSums {
    // Per state: corrected wrong and right counts, pooled.
    double wrong = 0.0;
    double right = 0.0;
};

// Corrected per-state count sums with D1 recomputed at D0's dark rate.
void equalized_sums(std::span<const BinRecord> bins, double excess_d1_per_bin,
                    EqualizedSums out[2]) {
    for (const BinRecord& b : bins) {
        double c1 = std::max(0.0, static_cast<double>(b.counts_d1) - excess_d1_per_bin);
        double c0 = static_cast<double>(b.counts_d0);
        if (b.sent_state == 0) {
            out[0].right += c0;
            out[0].wrong += c1;
        } else {
            out[1].right += c1;
            out[1].wrong += c0;
        }
    }
}

} // namespace

double qber_dark_equalized(std::span<const BinRecord> bins, double dark_d0,
                           double dark_d1, double bin_width) {
    if (dark_d1 < dark_d0)
        throw std::invalid_argument("qber_dark_equalized: requires dark_d1 >= dark_d0");
    EqualizedSums sums[2];
    equalized_sums(bins, (dark_d1 - dark_d0) * bin_width, sums);
    double wrong = sums[0].wrong + sums[1].wrong;
    double total = wrong + sums[0].right + sums[1].right;
    if (total <= 0.0) return 0.0;
    // Count-weighted average of the per-state QBERs == pooled ratio.
    return wrong / total;
}

double poisson_sigma(const std::function<double(std::span<const double>)>& f,
                     std::span<const double> counts) {
    std::vector<double> work(counts.begin(), counts.end());
    double var = 0.0;
    for (std::size_t i = 0; i < work.size(); ++i) {
        double n = work[i];
        if (n <= 0.0) continue; // zero counts carry zero Poisson variance
        double saved = work[i];
        work[i] = saved + 1.0;
        double up = f(work);
        work[i] = std::max(0.0, saved - 1.0);
        double dn = f(work);
        work[i] = saved;
        double deriv = (up - dn) / 2.0;
        var += deriv * deriv * n;
    }
    return std::sqrt(var);
}

double visibility_sigma(double c_correct, double c_wrong) {
    double total = c_correct + c_wrong;
    if (total <= 0.0) return 0.0;
    return 2.0 * std::sqrt(c_correct * c_wrong / (total * total * total));
}

double qber_sigma(double n_wrong, double n_right) {
    double total = n_wrong + n_right;
    if (total <= 0.0) return 0.0;
    return std::sqrt(n_wrong * n_right / (total * total * total));
}

std::vector<BinRecord> bin_series(std::span<const double> t_clicks_d0,
                                  std::span<const double> t_clicks_d1,
                                  const std::function<int(double)>& sent_state_at,
                                  double duration, double bin_width) {
    if (bin_width <= 0.0)
        throw std::invalid_argument("bin_series: bin_width must be > 0");
    auto nbins = static_cast<std::size_t>(std::ceil(duration / bin_width - 1e-12));
    std::vector<BinRecord> bins(nbins);
    for (std::size_t i = 0; i < nbins; ++i) {
        bins[i].t_start = static_cast<double>(i) * bin_width;
        bins[i].sent_state = sent_state_at(bins[i].t_start);
    }
    auto drop = [&](std::span<const double> ts, bool d1) {
        for (double t : ts) {
            if (t < 0.0 || t >= duration) continue;
            auto i = static_cast<std::size_t>(t / bin_width);
            if (i >= nbins) continue;
            if (d1) ++bins[i].counts_d1; else ++bins[i].counts_d0;
        }
    };
    drop(t_clicks_d0, false);
    drop(t_clicks_d1, true);
    return bins;
}

CalibratedRates calibrate_rates(double v_raw, double v_net, double dark_rate_correct,
                                double dark_rate_wrong) {
    if (v_net <= v_raw)
        throw std::invalid_argument("calibrate_rates: requires v_net > v_raw");
    // (S - s) + (dc - dw) = v_raw * (S + s + dc + dw) with (S - s) = v_net*(S + s)
    double total = (v_raw * (dark_rate_correct + dark_rate_wrong) -
                    (dark_rate_correct - dark_rate_wrong)) /
                   (v_net - v_raw);
    CalibratedRates r;
    r.signal_correct = 0.5 * total * (1.0 + v_net);
    r.signal_wrong = 0.5 * total * (1.0 - v_net);
    return r;
}

RunStats compute_run_stats(std::span<const BinRecord> bins, double dark_rate_d0,
                           double dark_rate_d1, double bin_width) {
    RunStats stats;
    stats.dark_rate_d0 = dark_rate_d0;
    stats.dark_rate_d1 = dark_rate_d1;
    stats.total_bins = static_cast<std::int64_t>(bins.size());

    double lock_sq = 0.0;
    // Per-bin visibilities for the scatter figure.
    std::vector<double> bin_vis[2];
    for (const BinRecord& b : bins) {
        StateStats& s = stats.per_state[b.sent_state];
        std::int64_t correct = b.sent_state == 0 ? b.counts_d0 : b.counts_d1;
        std::int64_t wrong = b.sent_state == 0 ? b.counts_d1 : b.counts_d0;
        s.counts_correct += correct;
        s.counts_wrong += wrong;
        s.duration += bin_width;
        if (correct + wrong > 0)
            bin_vis[b.sent_state].push_back(
                visibility(static_cast<double>(correct), static_cast<double>(wrong)));
        lock_sq += b.lock_residual_rms * b.lock_residual_rms;
    }
    if (!bins.empty())
        stats.lock_rms = std::sqrt(lock_sq / static_cast<double>(bins.size()));

    for (int st = 0; st < 2; ++st) {
        StateStats& s = stats.per_state[st];
        auto c = static_cast<double>(s.counts_correct);
        auto w = static_cast<double>(s.counts_wrong);
        if (c + w <= 0.0) continue;
        double dark_c = st == 0 ? dark_rate_d0 : dark_rate_d1;
        double dark_w = st == 0 ? dark_rate_d1 : dark_rate_d0;

        s.v_raw = {visibility(c, w), visibility_sigma(c, w)};
        s.v_net.value = net_visibility(c, w, dark_c, dark_w, s.duration, &s.net_clamped);
        double dur = s.duration;
        s.v_net.sigma = poisson_sigma(
            [dark_c, dark_w, dur](std::span<const double> n) {
                return net_visibility(n[0], n[1], dark_c, dark_w, dur);
            },
            std::array<double, 2>{c, w});
        s.qber_raw = {qber(w, c), qber_sigma(w, c)};

        if (bin_vis[st].size() > 1) {
            double mean = 0.0;
            for (double v : bin_vis[st]) mean += v;
            mean /= static_cast<double>(bin_vis[st].size());
            double sq = 0.0;
            for (double v : bin_vis[st]) sq += (v - mean) * (v - mean);
            s.v_raw_bin_scatter = std::sqrt(sq / static_cast<double>(bin_vis[st].size() - 1));
        }
    }

    // Dark-equalized QBER with its Poisson propagation over the four raw
    // per-state/per-detector sums.
    double excess = (dark_rate_d1 - dark_rate_d0) * bin_width;
    std::int64_t nbins_state[2] = {0, 0};
    double raw_sums[4] = {0, 0, 0, 0}; // c0_state0, c1_state0, c0_state1, c1_state1
    for (const BinRecord& b : bins) {
        raw_sums[2 * b.sent_state] += static_cast<double>(b.counts_d0);
        raw_sums[2 * b.sent_state + 1] += static_cast<double>(b.counts_d1);
        ++nbins_state[b.sent_state];
    }
    auto equalized = [excess, &nbins_state](std::span<const double> n) {
        double w0 = std::max(0.0, n[1] - excess * static_cast<double>(nbins_state[0]));
        double r1 = std::max(0.0, n[3] - excess * static_cast<double>(nbins_state[1]));
        double wrong = w0 + n[2];
        double total = wrong + n[0] + r1;
        return total > 0.0 ? wrong / total : 0.0;
    };
    stats.qber_dark_equalized.value = dark_rate_d1 >= dark_rate_d0
        ? qber_dark_equalized(bins, dark_rate_d0, dark_rate_d1, bin_width)
        : 0.0;
    stats.qber_dark_equalized.sigma = poisson_sigma(equalized, raw_sums);
    return stats;
}

} // namespace gv95
