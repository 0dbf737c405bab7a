#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

namespace crossflow {

// Empirical distribution of delay samples.  Small runs keep the sorted
// samples; long streams collapse into a fixed histogram plus exact counters
// for the point masses the delay laws place at 0 and at the crossing
// headway, so atom estimates stay exact either way.
class EmpiricalDistribution {
  public:
    // Sorted-sample backing (copies and sorts).
    static EmpiricalDistribution from_samples(std::vector<double> samples);

    // Histogram backing over (0, upper] with `bins` equal cells; values are
    // tested against the atom locations with exact equality before binning.
    static EmpiricalDistribution histogram(double upper, std::size_t bins,
                                           std::vector<double> atom_sites);

    void add(double value);  // histogram backing only

    // Folds another histogram-backed distribution of identical shape into
    // this one.  Merging partial histograms in a fixed order keeps results
    // byte-identical however the work was split.
    void merge(const EmpiricalDistribution& other);

    std::size_t count() const { return n_; }
    double cdf(double t) const;        // P(X <= t)
    double cdf_left(double t) const;   // P(X < t)
    double atom_mass(double site) const;  // exact-equality mass at site
    double mean() const;
    double max_value() const;

    // sup_t |F_n(t) - F(t)| against a law with CDF `cdf` and left limit
    // `cdf_left`; evaluated at sample points / bin edges and atom sites,
    // where the supremum of the difference is attained.
    double ks_distance(const std::function<double(double)>& cdf,
                       const std::function<double(double)>& cdf_left) const;

    const std::vector<double>& samples() const { return samples_; }

  private:
    bool histogram_mode_ = false;
    std::vector<double> samples_;       // sorted when sample-backed
    std::vector<double> atom_sites_;
    std::vector<std::size_t> atom_counts_;
    std::vector<std::size_t> bins_;
    double upper_ = 0;
    double sum_ = 0;
    double max_seen_ = 0;
    std::size_t n_ = 0;
    std::size_t overflow_ = 0;
};

// Dvoretzky-Kiefer-Wolfowitz band half-width: with probability >= 1-alpha the
// empirical CDF of n iid draws stays within this of the truth everywhere.
double dkw_epsilon(std::size_t n, double alpha);

// Upper critical value of chi-square with `df` degrees of freedom at upper
// tail probability `alpha` (Wilson-Hilferty cube approximation).
double chi_square_critical(double alpha, std::size_t df);

}  // namespace crossflow
