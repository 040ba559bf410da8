#pragma once

#include "lcwnet/conv.hpp"
#include "lcwnet/network.hpp"
#include "lcwnet/rng.hpp"

namespace lcw {

enum class InitScheme { glorot_uniform, minibatch_rescale };

/// Fan-based uniform init: w ~ U(-a, a) with a = sqrt(6 / (fan_in + fan_out)),
/// biases zero. LCW layers draw the same distribution and keep the zero-sum
/// component (projection onto the constraint subspace).
void glorot_init(DenseLayer& layer, Rng& rng);
void glorot_init(Conv2dLayer& layer, Rng& rng);

/// Applies glorot_init to every dense layer of the network.
void glorot_init(Network& net, Rng& rng);

/// Variance-preserving init from minibatch statistics: layer by layer in
/// forward order, draw raw weights uniform(-1, 1) (in LCW mode, raw v), run
/// the forward up to that layer on the reference batch, and divide the
/// weights by the standard deviation of the preactivation entries. Afterwards
/// every layer's preactivation has unit batch variance. Biases stay zero.
///
/// Requires a batch of at least 32 samples; throws naming the layer if a
/// preactivation is degenerate (std below 1e-12).
void minibatch_rescale_init(Network& net, const Matrix& batch, Rng& rng);

}  // namespace lcw
