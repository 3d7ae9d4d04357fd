#ifndef CAPM_PARTITION_PRIOR_HPP
#define CAPM_PARTITION_PRIOR_HPP

#include <boost/multiprecision/cpp_int.hpp>
#include <vector>

#include "capm/types.hpp"

namespace capm {

using BigInt = boost::multiprecision::cpp_int;

/// log of the cohesion c * (|S|-1)!, computed via lgamma.
double log_cohesion(int cluster_size, double c);

/// Sum of log cohesions over the clusters of p; the normalizing constant
/// of the product distribution is not included.
double log_partition_prior_unnormalized(const Partition& p, double c);

/// Exact Bell number via the binomial recursion.
BigInt bell_number(int n);

/// All set partitions of {0..T-1} in canonical label form. Refused for T > 12.
std::vector<Partition> enumerate_partitions(int T);

/// Normalized prior probability of p, by exhaustive enumeration. T <= 12 only.
double exact_partition_prior(const Partition& p, double c);

}  // namespace capm

#endif
