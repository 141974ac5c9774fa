#include "doanav/model/config.hpp"

#include <set>
#include <stdexcept>

namespace doanav::model {

std::string to_string(PixelEmbed m) {
  switch (m) {
    case PixelEmbed::None: return "none";
    case PixelEmbed::OneD: return "1d";
    case PixelEmbed::TwoD: return "2d";
    case PixelEmbed::Relative: return "relative";
  }
  return "1d";
}

std::string to_string(BranchToken m) {
  switch (m) {
    case BranchToken::Ed: return "ed";
    case BranchToken::Bs: return "bs";
    case BranchToken::None: return "none";
  }
  return "ed";
}

PixelEmbed pixel_embed_from_string(const std::string& s) {
  if (s == "none") return PixelEmbed::None;
  if (s == "1d") return PixelEmbed::OneD;
  if (s == "2d") return PixelEmbed::TwoD;
  if (s == "relative") return PixelEmbed::Relative;
  throw std::invalid_argument("unknown pixel_embed mode: " + s);
}

BranchToken branch_token_from_string(const std::string& s) {
  if (s == "ed") return BranchToken::Ed;
  if (s == "bs") return BranchToken::Bs;
  if (s == "none") return BranchToken::None;
  throw std::invalid_argument("unknown branch_token mode: " + s);
}

void ModelConfig::validate() const {
  auto fail = [](const std::string& m) { throw std::invalid_argument("ModelConfig: " + m); };
  if (num_classes < 1 || image_grid < 1 || d_img < 1 || d_vis < 1) fail("shape fields must be positive");
  if (embed_dim < 1 || head_dim < 1 || num_heads < 1 || reducer_hidden < 1 || lstm_input < 1 ||
      lstm_hidden < 1 || gcn_dim < 1)
    fail("layer widths must be positive");
  if (conf_threshold < 0.0 || conf_threshold > 1.0) fail("conf_threshold must be in [0, 1]");
  if (dropout_rate < 0.0 || dropout_rate >= 1.0) fail("dropout_rate must be in [0, 1)");
  if (done_boost < 0.0) fail("done_boost must be nonnegative");
}

void ModelConfig::match_world(const sim::WorldConfig& w) {
  num_classes = w.num_classes;
  image_grid = w.image_grid;
  d_img = w.d_img;
  d_vis = w.d_vis;
}

bool ModelConfig::same_shapes(const ModelConfig& o) const {
  return num_classes == o.num_classes && image_grid == o.image_grid && d_img == o.d_img &&
         d_vis == o.d_vis && embed_dim == o.embed_dim && head_dim == o.head_dim &&
         num_heads == o.num_heads && reducer_hidden == o.reducer_hidden &&
         lstm_input == o.lstm_input && lstm_hidden == o.lstm_hidden && gcn_dim == o.gcn_dim &&
         pixel_embed == o.pixel_embed && branch_token == o.branch_token &&
         use_gcn_baseline == o.use_gcn_baseline;
}

void set_toggle(ModelConfig& c, const std::string& name, bool on) {
  if (name == "use_uaoa") c.use_uaoa = on;
  else if (name == "use_uaia") c.use_uaia = on;
  else if (name == "use_abed") c.branch_token = on ? BranchToken::Ed : BranchToken::None;
  else if (name == "use_ig") c.use_ig = on;
  else if (name == "use_vag") c.use_vag = on;
  else if (name == "use_cf") c.use_cf = on;
  else if (name == "undirected_doa") c.undirected_doa = on;
  else if (name == "use_gcn_baseline") c.use_gcn_baseline = on;
  else if (name == "done_reminder") c.done_reminder = on;
  else throw std::invalid_argument("unknown model toggle: " + name);
}

bool get_toggle(const ModelConfig& c, const std::string& name) {
  if (name == "use_uaoa") return c.use_uaoa;
  if (name == "use_uaia") return c.use_uaia;
  if (name == "use_abed") return c.use_abed();
  if (name == "use_ig") return c.use_ig;
  if (name == "use_vag") return c.use_vag;
  if (name == "use_cf") return c.use_cf;
  if (name == "undirected_doa") return c.undirected_doa;
  if (name == "use_gcn_baseline") return c.use_gcn_baseline;
  if (name == "done_reminder") return c.done_reminder;
  throw std::invalid_argument("unknown model toggle: " + name);
}

void to_json(nlohmann::json& j, const ModelConfig& c) {
  j = nlohmann::json{{"num_classes", c.num_classes},
                     {"image_grid", c.image_grid},
                     {"d_img", c.d_img},
                     {"d_vis", c.d_vis},
                     {"embed_dim", c.embed_dim},
                     {"head_dim", c.head_dim},
                     {"num_heads", c.num_heads},
                     {"reducer_hidden", c.reducer_hidden},
                     {"lstm_input", c.lstm_input},
                     {"lstm_hidden", c.lstm_hidden},
                     {"gcn_dim", c.gcn_dim},
                     {"conf_threshold", c.conf_threshold},
                     {"dropout_rate", c.dropout_rate},
                     {"done_boost", c.done_boost},
                     {"use_uaoa", c.use_uaoa},
                     {"use_uaia", c.use_uaia},
                     {"use_ig", c.use_ig},
                     {"use_vag", c.use_vag},
                     {"use_cf", c.use_cf},
                     {"pixel_embed", to_string(c.pixel_embed)},
                     {"undirected_doa", c.undirected_doa},
                     {"branch_token", to_string(c.branch_token)},
                     {"use_gcn_baseline", c.use_gcn_baseline},
                     {"done_reminder", c.done_reminder}};
}

void from_json(const nlohmann::json& j, ModelConfig& c) {
  static const std::set<std::string> known = {
      "num_classes", "image_grid", "d_img", "d_vis", "embed_dim", "head_dim", "num_heads",
      "reducer_hidden", "lstm_input", "lstm_hidden", "gcn_dim", "conf_threshold", "dropout_rate",
      "done_boost", "use_uaoa", "use_uaia", "use_abed", "use_ig", "use_vag", "use_cf",
      "pixel_embed", "undirected_doa", "branch_token", "use_gcn_baseline", "done_reminder"};
  for (const auto& [k, v] : j.items())
    if (!known.contains(k)) throw std::invalid_argument("unknown model config key: " + k);
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) j.at(key).get_to(field);
  };
  get("num_classes", c.num_classes);
  get("image_grid", c.image_grid);
  get("d_img", c.d_img);
  get("d_vis", c.d_vis);
  get("embed_dim", c.embed_dim);
  get("head_dim", c.head_dim);
  get("num_heads", c.num_heads);
  get("reducer_hidden", c.reducer_hidden);
  get("lstm_input", c.lstm_input);
  get("lstm_hidden", c.lstm_hidden);
  get("gcn_dim", c.gcn_dim);
  get("conf_threshold", c.conf_threshold);
  get("dropout_rate", c.dropout_rate);
  get("done_boost", c.done_boost);
  get("use_uaoa", c.use_uaoa);
  get("use_uaia", c.use_uaia);
  get("use_ig", c.use_ig);
  get("use_vag", c.use_vag);
  get("use_cf", c.use_cf);
  if (j.contains("pixel_embed")) c.pixel_embed = pixel_embed_from_string(j.at("pixel_embed").get<std::string>());
  get("undirected_doa", c.undirected_doa);
  if (j.contains("branch_token")) c.branch_token = branch_token_from_string(j.at("branch_token").get<std::string>());
  if (j.contains("use_abed")) set_toggle(c, "use_abed", j.at("use_abed").get<bool>());
  get("use_gcn_baseline", c.use_gcn_baseline);
  get("done_reminder", c.done_reminder);
}

}  // namespace doanav::model
