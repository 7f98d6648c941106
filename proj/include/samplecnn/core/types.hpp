#ifndef SAMPLECNN_CORE_TYPES_HPP
#define SAMPLECNN_CORE_TYPES_HPP

#include <Eigen/Dense>

namespace samplecnn {

using Index = Eigen::Index;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Array = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

/// Dense (channels x time) activation tensor. Rows are channels, columns are
/// time steps; the universal currency between layers.
template <typename Scalar>
using FeatureMap = Matrix<Scalar>;

/// Dense (bands x frames) mel-spectrogram, amplitude after compression.
template <typename Scalar>
using Spectrogram = Matrix<Scalar>;

using IndexMatrix = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic>;

} // namespace samplecnn

#endif
