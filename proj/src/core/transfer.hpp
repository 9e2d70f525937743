#pragma once

#include <string>
#include <vector>

#include "core/donor_selection.hpp"
#include "core/plane.hpp"
#include "core/predictor.hpp"
#include "core/spectrum.hpp"
#include "core/volume.hpp"

namespace kswap {

enum class Aggregation {
  MeanProbability,  // average soft maps
  MeanOfBinarized,  // threshold each map first, then average
};

struct TransferConfig {
  double beta = 0.03;
  int n_mst = 7;
  Aggregation aggregation = Aggregation::MeanProbability;
  double binarize_threshold = 0.5;

  void validate() const;
};

// Masked amplitudes from `source`, the rest of the amplitudes and all of the
// phase from `target`.
SliceSpectrum swap_amplitudes(const SliceSpectrum& source, const SliceSpectrum& target,
                              const MaskPlane& mask);

// Amplitude swap without the final clip to [0,1].
Plane fda_swap_unclipped(const Plane& source, const Plane& target, double beta);

// Target slice restyled with the source's low-frequency amplitudes, clipped to
// [0,1]. beta == 0 returns the target unchanged.
Plane fda_swap(const Plane& source, const Plane& target, double beta);

struct TransferResult {
  Volume probabilities;
  std::vector<std::string> warnings;
};

// Mean of predictor outputs over every donor of every target slice. Donor
// contributions are accumulated in donor-list order.
TransferResult multi_source_transfer(const Volume& target, const ScanCollection& sources,
                                     const DonorAssignment& donors, const TransferConfig& config,
                                     const Predictor& predictor);

// No adaptation: the predictor applied to each raw target slice.
Volume naive_predict(const Volume& target, const Predictor& predictor);

// Mask of voxels with probability strictly above the threshold.
Volume binarize(const Volume& probabilities, double threshold);

// Target adapted slice by slice with the donor of the given rank (clamped to
// the last available donor when a slice has fewer).
Volume adapt_with_rank(const Volume& target, const ScanCollection& sources,
                       const DonorAssignment& donors, double beta, std::size_t rank);

// Per slice, the mean of the slice adapted to each of its donors.
Volume adapt_composite(const Volume& target, const ScanCollection& sources,
                       const DonorAssignment& donors, double beta);

}  // namespace kswap
