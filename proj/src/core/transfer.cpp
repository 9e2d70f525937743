#include "core/transfer.hpp"

#include <algorithm>
#include <cmath>

#include "core/error.hpp"
#include "core/parallel.hpp"

namespace kswap {

void TransferConfig::validate() const {
  require(beta >= 0.0 && beta <= 1.0, ErrorCode::InvalidArgument,
          "beta " + std::to_string(beta) + " is outside [0,1]");
  require(n_mst >= 1, ErrorCode::InvalidArgument, "n_mst must be >= 1");
  require(binarize_threshold > 0.0 && binarize_threshold < 1.0, ErrorCode::InvalidArgument,
          "binarize threshold must lie in (0,1)");
}

SliceSpectrum swap_amplitudes(const SliceSpectrum& source, const SliceSpectrum& target,
                              const MaskPlane& mask) {
  require(source.amplitude.same_shape(target.amplitude) &&
              mask.values.same_shape(target.amplitude),
          ErrorCode::ShapeMismatch,
          "cannot swap amplitudes between " + source.amplitude.shape_string() + " and " +
              target.amplitude.shape_string() + " spectra");
  SliceSpectrum out = target;
  for (std::size_t i = 0; i < out.amplitude.size(); ++i)
    if (mask.values.values[i] != 0.0) out.amplitude.values[i] = source.amplitude.values[i];
  return out;
}

namespace {

void check_pair(const Plane& source, const Plane& target) {
  require(source.same_shape(target), ErrorCode::ShapeMismatch,
          "source slice is " + source.shape_string() + " but target slice is " +
              target.shape_string());
}

Plane clip_unit(Plane p) {
  for (double& v : p.values) v = std::clamp(v, 0.0, 1.0);
  return p;
}

}  // namespace

Plane fda_swap_unclipped(const Plane& source, const Plane& target, double beta) {
  check_pair(source, target);
  const MaskPlane mask = circular_mask(target.rows, target.cols, beta);
  if (beta == 0.0) return target;
  return recompose(swap_amplitudes(decompose(source), decompose(target), mask));
}

Plane fda_swap(const Plane& source, const Plane& target, double beta) {
  return clip_unit(fda_swap_unclipped(source, target, beta));
}

namespace {

const Volume& donor_volume(const ScanCollection& sources, const DonorRef& ref,
                           const Volume& target) {
  require(ref.scan_index < sources.size(), ErrorCode::InvalidArgument,
          "donor refers to scan #" + std::to_string(ref.scan_index) + " but only " +
              std::to_string(sources.size()) + " sources are loaded");
  const Volume& scan = sources.scans[ref.scan_index];
  require(scan.id() == ref.scan_id, ErrorCode::InvalidArgument,
          "donor scan id '" + ref.scan_id + "' does not match loaded source '" + scan.id() + "'");
  require(scan.shape().rows == target.shape().rows && scan.shape().cols == target.shape().cols,
          ErrorCode::ShapeMismatch,
          "donor '" + scan.id() + "' slices are " + std::to_string(scan.shape().rows) + "x" +
              std::to_string(scan.shape().cols) + ", target slices are " +
              std::to_string(target.shape().rows) + "x" + std::to_string(target.shape().cols));
  return scan;
}

void check_assignment(const Volume& target, const DonorAssignment& donors) {
  require(donors.per_slice.size() == target.shape().slices, ErrorCode::ShapeMismatch,
          "donor assignment covers " + std::to_string(donors.per_slice.size()) +
              " slices, target '" + target.id() + "' has " +
              std::to_string(target.shape().slices));
  for (std::size_t i = 0; i < donors.per_slice.size(); ++i)
    require(!donors.per_slice[i].empty(), ErrorCode::InvalidArgument,
            "target slice " + std::to_string(i) + " has no donors");
}

// Rounds through float so sums of identical terms divide back exactly.
inline double as_stored(double v) { return static_cast<double>(static_cast<float>(v)); }

}  // namespace

TransferResult multi_source_transfer(const Volume& target, const ScanCollection& sources,
                                     const DonorAssignment& donors, const TransferConfig& config,
                                     const Predictor& predictor) {
  config.validate();
  check_assignment(target, donors);
  const std::size_t slices = target.shape().slices;
  std::vector<Plane> planes(slices);
  std::vector<std::string> slice_warnings(slices);

  parallel_for(slices, [&](std::size_t i) {
    const Plane t = target.slice(i);
    const auto& refs = donors.per_slice[i];
    Plane acc(t.rows, t.cols);
    for (const DonorRef& ref : refs) {
      const Plane donor = donor_volume(sources, ref, target).slice(ref.slice_index);
      Plane adapted = fda_swap(donor, t, config.beta);
      Plane p;
      try {
        p = checked_predict(predictor, adapted, {target.id(), i});
      } catch (const Error& e) {
        throw Error(e.code(), "slice " + std::to_string(i) + ": " + e.what());
      } catch (const std::exception& e) {
        throw Error(ErrorCode::Internal, "slice " + std::to_string(i) + ": " + e.what());
      }
      for (std::size_t k = 0; k < p.size(); ++k) {
        double v = as_stored(p.values[k]);
        if (config.aggregation == Aggregation::MeanOfBinarized)
          v = v > config.binarize_threshold ? 1.0 : 0.0;
        acc.values[k] += v;
      }
    }
    const auto count = static_cast<double>(refs.size());
    for (double& v : acc.values) v = std::min(v / count, 1.0);
    planes[i] = std::move(acc);
    if (refs.size() != static_cast<std::size_t>(config.n_mst))
      slice_warnings[i] = "slice " + std::to_string(i) + ": averaged " +
                          std::to_string(refs.size()) + " donors, n_mst is " +
                          std::to_string(config.n_mst);
  });

  std::vector<std::string> warnings;
  for (auto& w : slice_warnings)
    if (!w.empty()) warnings.push_back(std::move(w));
  return {Volume::from_planes(planes, target.spacing(), target.id(), target.domain(),
                              VolumeKind::Probability),
          std::move(warnings)};
}

Volume naive_predict(const Volume& target, const Predictor& predictor) {
  require(target.kind() == VolumeKind::Intensity, ErrorCode::InvalidArgument,
          "naive prediction needs an intensity volume");
  const std::size_t slices = target.shape().slices;
  std::vector<Plane> planes(slices);
  parallel_for(slices, [&](std::size_t i) {
    try {
      planes[i] = checked_predict(predictor, target.slice(i), {target.id(), i});
    } catch (const Error& e) {
      throw Error(e.code(), "slice " + std::to_string(i) + ": " + e.what());
    } catch (const std::exception& e) {
      throw Error(ErrorCode::Internal, "slice " + std::to_string(i) + ": " + e.what());
    }
  });
  return Volume::from_planes(planes, target.spacing(), target.id(), target.domain(),
                             VolumeKind::Probability);
}

Volume binarize(const Volume& probabilities, double threshold) {
  std::vector<float> data(probabilities.data().begin(), probabilities.data().end());
  for (float& v : data) v = static_cast<double>(v) > threshold ? 1.0f : 0.0f;
  return Volume(probabilities.shape(), std::move(data), probabilities.spacing(),
                probabilities.id(), probabilities.domain(), VolumeKind::Mask);
}

Volume adapt_with_rank(const Volume& target, const ScanCollection& sources,
                       const DonorAssignment& donors, double beta, std::size_t rank) {
  check_assignment(target, donors);
  const std::size_t slices = target.shape().slices;
  std::vector<Plane> planes(slices);
  parallel_for(slices, [&](std::size_t i) {
    const auto& refs = donors.per_slice[i];
    const DonorRef& ref = refs[std::min(rank, refs.size() - 1)];
    planes[i] = fda_swap(donor_volume(sources, ref, target).slice(ref.slice_index), target.slice(i),
                         beta);
  });
  return Volume::from_planes(planes, target.spacing(), target.id(), target.domain(),
                             VolumeKind::Intensity);
}

Volume adapt_composite(const Volume& target, const ScanCollection& sources,
                       const DonorAssignment& donors, double beta) {
  check_assignment(target, donors);
  const std::size_t slices = target.shape().slices;
  std::vector<Plane> planes(slices);
  parallel_for(slices, [&](std::size_t i) {
    const Plane t = target.slice(i);
    Plane acc(t.rows, t.cols);
    for (const DonorRef& ref : donors.per_slice[i]) {
      const Plane a = fda_swap(donor_volume(sources, ref, target).slice(ref.slice_index), t, beta);
      for (std::size_t k = 0; k < a.size(); ++k) acc.values[k] += as_stored(a.values[k]);
    }
    const auto count = static_cast<double>(donors.per_slice[i].size());
    for (double& v : acc.values) v = std::min(v / count, 1.0);
    planes[i] = std::move(acc);
  });
  return Volume::from_planes(planes, target.spacing(), target.id(), target.domain(),
                             VolumeKind::Intensity);
}

}  // namespace kswap
