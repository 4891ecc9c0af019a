#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "laneracer/conv.hpp"
#include "laneracer/tensor.hpp"

namespace lr::nn {

// x [H,W,Cin], kernel [kh,kw,Cin,Cout], bias [Cout] -> [H',W',Cout]. Cross-correlation, no flip.
Tensor conv2d(const Tensor& x, const Tensor& kernel, const Tensor& bias, std::array<std::size_t, 2> stride,
              Padding padding);

// x [T,H,W,Cin], kernel [kt,kh,kw,Cin,Cout], bias [Cout] -> [T',H',W',Cout].
Tensor conv3d(const Tensor& x, const Tensor& kernel, const Tensor& bias, Dims3 stride, Padding padding);

// x [n], weight [n,m], bias [m] -> [m].
Tensor dense(const Tensor& x, const Tensor& weight, const Tensor& bias);

Tensor relu(const Tensor& x);
Tensor tanh(const Tensor& x);
Tensor sigmoid(const Tensor& x);
double sigmoid(double x);

Tensor maxpool2d(const Tensor& x, std::array<std::size_t, 2> window, std::array<std::size_t, 2> stride);
Tensor maxpool3d(const Tensor& x, Dims3 window, Dims3 stride);

// Both reduce over every element.
double mse_loss(const Tensor& pred, const Tensor& target);
double mae_metric(const Tensor& pred, const Tensor& target);

// Convolutional LSTM. Gate channels of kernel/recurrent_kernel/bias are laid
// out as four blocks of `filters`: input, forget, candidate, output.
struct ConvLstmWeights {
  Tensor kernel;            // [kh,kw,Cin,4F]
  Tensor recurrent_kernel;  // [kh,kw,F,4F]
  Tensor bias;              // [4F]
};

struct LstmState {
  Tensor h;  // [H,W,F]
  Tensor c;  // [H,W,F]
};

LstmState convlstm2d_step(const Tensor& x, const LstmState& prev, const ConvLstmWeights& weights);

// Per-step values kept for backpropagation through time.
struct ConvLstmTrace {
  std::vector<std::vector<double>> gates;  // post-activation i,f,g,o per step, [H*W, 4F]
  std::vector<std::vector<double>> c;      // cell state after each step
  std::vector<std::vector<double>> h;      // hidden state after each step
};

// Runs the cell over x [T,H,W,Cin] from zero state. Returns all hidden states [T,H,W,F].
Tensor convlstm2d_sequence(const Tensor& x, const ConvLstmWeights& weights, ConvLstmTrace* trace);

// dh_seq [T,H,W,F] is the upstream gradient on every hidden state. Accumulates
// into dx (same shape as x) and the three weight gradients.
void convlstm2d_sequence_backward(const Tensor& x, const ConvLstmWeights& weights, const ConvLstmTrace& trace,
                                  const Tensor& dh_seq, Tensor* dx, ConvLstmWeights& dweights);

}  // namespace lr::nn
