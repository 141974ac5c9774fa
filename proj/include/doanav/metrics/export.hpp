#pragma once

#include <filesystem>
#include <vector>

#include "doanav/model/params.hpp"

namespace doanav::metrics {

/// Row-normalized intrinsic graph; row p is the attention each class gets when p is sought.
std::vector<std::vector<double>> normalized_intrinsic_graph(const model::ModelParams& params);

/// Writes gn_matrix.csv (normalized G_n) and, when given, gv_samples.csv (one
/// sampled view-adaptive vector per row) under dir.
void export_graphs(const model::ModelParams& params, const std::filesystem::path& dir,
                   const std::vector<std::vector<double>>& view_samples = {});

}  // namespace doanav::metrics
