#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "doanav/ad/tape.hpp"

namespace doanav::ad {

// Linear algebra.
Var matmul(Var a, Var b);
Var transpose(Var x);

// Elementwise; operands must have identical shape.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);

/// x (m x n) plus a 1 x n bias broadcast over rows.
Var add_row_bias(Var x, Var bias);

Var scale(Var x, double s);
/// x times a learnable 1 x 1 scalar.
Var scale_by(Var x, Var s);
/// Row q of x (m x n) multiplied by w[q]; w has m entries (1 x m or m x 1).
Var scale_rows(Var x, Var w);

Var relu(Var x);
Var sigmoid(Var x);
Var tanh(Var x);

/// Row-wise softmax, stabilized by subtracting the row max.
Var softmax_rows(Var x);
Var log_softmax_rows(Var x);

/// Column means: m x n -> 1 x n.
Var mean_pool_rows(Var x);
/// Sum of all entries -> 1 x 1.
Var sum(Var x);

/// axis 0 stacks rows (equal column counts); axis 1 stacks columns.
Var concat(std::span<const Var> xs, int axis);
Var concat(std::initializer_list<Var> xs, int axis);

Var slice_cols(Var x, std::size_t begin, std::size_t count);
Var gather_rows(Var x, std::span<const std::size_t> rows);
Var row(Var x, std::size_t r);
/// 1 x k -> 1 x n with x[j] written to column index[j]; other columns are zero.
Var scatter_cols(Var x, std::span<const std::size_t> index, std::size_t n);
Var reshape(Var x, std::size_t rows, std::size_t cols);
/// Element i of a row vector as a 1 x 1 node.
Var pick(Var x, std::size_t i);

/// Copy of x's value with no gradient path.
Var detach(Var x);

/// Inverted dropout. Exact identity when training is false.
Var dropout(Var x, double rate, std::mt19937_64& rng, bool training);

struct LstmWeights {
  Var input_weights;   // in x 4H, gate order i, f, g, o
  Var hidden_weights;  // H x 4H
  Var bias;            // 1 x 4H
};

/// One LSTM cell step; returns (h', c').
std::pair<Var, Var> lstm_step(const LstmWeights& w, Var x, Var h, Var c);

}  // namespace doanav::ad
