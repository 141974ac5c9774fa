#include "doanav/metrics/export.hpp"

#include <stdexcept>

#include "doanav/ad/ops.hpp"
#include "doanav/metrics/records_io.hpp"
#include "doanav/model/components.hpp"

namespace doanav::metrics {

std::vector<std::vector<double>> normalized_intrinsic_graph(const model::ModelParams& params) {
  if (params.ids.intrinsic_graph == model::kNoParam) throw std::invalid_argument("model has no intrinsic graph");
  ad::Tape tape;
  ad::Var g = tape.constant(params.store.value(params.ids.intrinsic_graph));
  const ad::Tensor a = ad::softmax_rows(model::intrinsic_logits(g, params.cfg.undirected_doa)).value();
  std::vector<std::vector<double>> rows(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    rows[i].assign(&a.data()[i * a.cols()], &a.data()[(i + 1) * a.cols()]);
  return rows;
}

void export_graphs(const model::ModelParams& params, const std::filesystem::path& dir,
                   const std::vector<std::vector<double>>& view_samples) {
  std::filesystem::create_directories(dir);
  write_csv_matrix(dir / "gn_matrix.csv", normalized_intrinsic_graph(params));
  if (!view_samples.empty()) write_csv_matrix(dir / "gv_samples.csv", view_samples);
}

}  // namespace doanav::metrics
