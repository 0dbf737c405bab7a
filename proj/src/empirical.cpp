#include "crossflow/empirical.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace crossflow {

EmpiricalDistribution EmpiricalDistribution::from_samples(std::vector<double> samples) {
    EmpiricalDistribution d;
    d.samples_ = std::move(samples);
    std::sort(d.samples_.begin(), d.samples_.end());
    d.n_ = d.samples_.size();
    d.sum_ = 0;
    for (double v : d.samples_) d.sum_ += v;
    d.max_seen_ = d.n_ ? d.samples_.back() : 0.0;
    return d;
}

EmpiricalDistribution EmpiricalDistribution::histogram(double upper, std::size_t bins,
                                                       std::vector<double> atom_sites) {
    if (!(upper > 0) || bins == 0)
        throw std::invalid_argument("histogram needs upper > 0 and bins > 0");
    EmpiricalDistribution d;
    d.histogram_mode_ = true;
    d.upper_ = upper;
    d.bins_.assign(bins, 0);
    d.atom_sites_ = std::move(atom_sites);
    d.atom_counts_.assign(d.atom_sites_.size(), 0);
    return d;
}

void EmpiricalDistribution::add(double value) {
    if (!histogram_mode_)
        throw std::logic_error("add requires histogram backing");
    ++n_;
    sum_ += value;
    max_seen_ = std::max(max_seen_, value);
    for (std::size_t i = 0; i < atom_sites_.size(); ++i) {
        if (value == atom_sites_[i]) {
            ++atom_counts_[i];
            return;
        }
    }
    if (value > upper_) {
        ++overflow_;
        return;
    }
    double pos = value / upper_ * static_cast<double>(bins_.size());
    auto idx = static_cast<std::size_t>(std::max(pos, 0.0));
    if (idx >= bins_.size()) idx = bins_.size() - 1;
    ++bins_[idx];
}

void EmpiricalDistribution::merge(const EmpiricalDistribution& other) {
    if (!histogram_mode_ || !other.histogram_mode_ ||
        bins_.size() != other.bins_.size() || upper_ != other.upper_ ||
        atom_sites_ != other.atom_sites_)
        throw std::logic_error("merge requires identically shaped histograms");
    n_ += other.n_;
    sum_ += other.sum_;
    max_seen_ = std::max(max_seen_, other.max_seen_);
    overflow_ += other.overflow_;
    for (std::size_t i = 0; i < bins_.size(); ++i) bins_[i] += other.bins_[i];
    for (std::size_t i = 0; i < atom_counts_.size(); ++i)
        atom_counts_[i] += other.atom_counts_[i];
}

double EmpiricalDistribution::cdf(double t) const {
    if (n_ == 0) return 0;
    if (!histogram_mode_) {
        auto it = std::upper_bound(samples_.begin(), samples_.end(), t);
        return static_cast<double>(it - samples_.begin()) / static_cast<double>(n_);
    }
    double acc = 0;
    for (std::size_t i = 0; i < atom_sites_.size(); ++i)
        if (atom_sites_[i] <= t) acc += static_cast<double>(atom_counts_[i]);
    if (t >= upper_) {
        for (std::size_t b : bins_) acc += static_cast<double>(b);
        if (t >= max_seen_) acc += static_cast<double>(overflow_);
    } else if (t > 0) {
        double pos = t / upper_ * static_cast<double>(bins_.size());
        auto full = static_cast<std::size_t>(pos);
        for (std::size_t i = 0; i < full && i < bins_.size(); ++i)
            acc += static_cast<double>(bins_[i]);
        if (full < bins_.size())
            acc += (pos - static_cast<double>(full)) * static_cast<double>(bins_[full]);
    }
    return acc / static_cast<double>(n_);
}

double EmpiricalDistribution::cdf_left(double t) const {
    if (n_ == 0) return 0;
    if (!histogram_mode_) {
        auto it = std::lower_bound(samples_.begin(), samples_.end(), t);
        return static_cast<double>(it - samples_.begin()) / static_cast<double>(n_);
    }
    double atoms_below = 0;
    for (std::size_t i = 0; i < atom_sites_.size(); ++i)
        if (atom_sites_[i] < t) atoms_below += static_cast<double>(atom_counts_[i]);
    double cont = cdf(t);
    for (std::size_t i = 0; i < atom_sites_.size(); ++i)
        if (atom_sites_[i] <= t) cont -= static_cast<double>(atom_counts_[i]) / static_cast<double>(n_);
    return cont + atoms_below / static_cast<double>(n_);
}

double EmpiricalDistribution::atom_mass(double site) const {
    if (n_ == 0) return 0;
    if (!histogram_mode_) {
        auto lo = std::lower_bound(samples_.begin(), samples_.end(), site);
        auto hi = std::upper_bound(samples_.begin(), samples_.end(), site);
        return static_cast<double>(hi - lo) / static_cast<double>(n_);
    }
    for (std::size_t i = 0; i < atom_sites_.size(); ++i)
        if (atom_sites_[i] == site)
            return static_cast<double>(atom_counts_[i]) / static_cast<double>(n_);
    return 0;
}

double EmpiricalDistribution::mean() const {
    return n_ ? sum_ / static_cast<double>(n_) : 0.0;
}

double EmpiricalDistribution::max_value() const { return max_seen_; }

double EmpiricalDistribution::ks_distance(
    const std::function<double(double)>& cdf_fn,
    const std::function<double(double)>& cdf_left_fn) const {
    double worst = 0;
    auto probe = [&](double t) {
        worst = std::max(worst, std::abs(cdf(t) - cdf_fn(t)));
        worst = std::max(worst, std::abs(cdf_left(t) - cdf_left_fn(t)));
    };
    if (!histogram_mode_) {
        for (std::size_t i = 0; i < samples_.size(); ++i) {
            if (i > 0 && samples_[i] == samples_[i - 1]) continue;
            probe(samples_[i]);
        }
    } else {
        for (double site : atom_sites_) probe(site);
        double width = upper_ / static_cast<double>(bins_.size());
        for (std::size_t i = 0; i <= bins_.size(); ++i)
            probe(static_cast<double>(i) * width);
        if (overflow_ > 0) probe(max_seen_);
    }
    return worst;
}

double dkw_epsilon(std::size_t n, double alpha) {
    return std::sqrt(std::log(2.0 / alpha) / (2.0 * static_cast<double>(n)));
}

namespace {

// Upper-tail standard normal quantile by bisection on erfc: monotone,
// library-accurate, no magic rational coefficients.
double normal_upper_quantile(double alpha) {
    double lo = 0.0, hi = 40.0;
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        double tail = 0.5 * std::erfc(mid / std::sqrt(2.0));
        (tail > alpha ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

double chi_square_critical(double alpha, std::size_t df) {
    double z = normal_upper_quantile(alpha);
    double d = static_cast<double>(df);
    double u = 1.0 - 2.0 / (9.0 * d) + z * std::sqrt(2.0 / (9.0 * d));
    return d * u * u * u;
}

}  // namespace crossflow
