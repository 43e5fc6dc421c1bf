#pragma once

#include <cstddef>
#include <span>

namespace qfd::nn {

inline constexpr double kLogClamp = 1e-12;

// Max-shifted softmax over one row of logits.
template <typename T>
void softmax(std::span<const T> logits, std::span<T> probs);

// -sum p log q, with q clamped below at 1e-12.
template <typename T>
double cross_entropy(std::span<const T> target, std::span<const T> predicted);

// Mean softmax cross-entropy over a batch of logits [batch][classes] with
// 0-based class indices. Writes d(mean loss)/d(logits) = (q - p)/batch into
// dlogits when it is non-empty.
template <typename T>
double softmax_cross_entropy(std::span<const T> logits, std::span<const int> classes, std::size_t num_classes,
                             std::span<T> dlogits);

// Linear-kernel MMD: squared Euclidean distance between the feature means of
// source [ns][dim] and target [nt][dim]. Gradients (if spans non-empty) are
// +2(mean_s - mean_t)/ns for each source row and -2(mean_s - mean_t)/nt for
// each target row. Throws InputDomainError if either side is empty.
template <typename T>
double mmd_linear(std::span<const T> source, std::size_t ns, std::span<const T> target, std::size_t nt,
                  std::size_t dim, std::span<T> dsource, std::span<T> dtarget);

// Unbiased Gaussian-kernel MMD^2 with k(x,y) = exp(-|x-y|^2 / (2 bw^2)).
// Needs at least two rows per side.
template <typename T>
double mmd_rbf(std::span<const T> source, std::size_t ns, std::span<const T> target, std::size_t nt, std::size_t dim,
               double bandwidth, std::span<T> dsource, std::span<T> dtarget);

}  // namespace qfd::nn
