#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace latarb {

// Neumaier compensated summation.
class CompensatedSum {
public:
    void add(double x);
    double value() const { return sum_ + comp_; }
    void merge(const CompensatedSum& other);

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

double sum(std::span<const double> xs);
double mean(std::span<const double> xs);
// Unbiased (n-1) sample variance.
double sample_variance(std::span<const double> xs);
// Hyndman-Fan type 7 quantile (linear interpolation); `sorted` must be ascending.
double quantile_sorted(std::span<const double> sorted, double p);
double median(std::vector<double> xs);

}  // namespace latarb
