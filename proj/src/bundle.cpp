#include <openssl/evp.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "json.hpp"
#include "otqq/io.hpp"

namespace otqq {

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json set_json(const SetSummary& s, const std::string& stem) {
  ordered_json j;
  j["name"] = stem;
  if (!s.group.empty()) j["group"] = s.group;
  j["method"] = s.set.method.label();
  if (s.set.method.method == Method::EOT) j["epsilon"] = s.set.method.epsilon;
  j["kind"] = s.set.component ? "qq" : "potential";
  if (s.set.component) j["component"] = *s.set.component + 1;
  j["region"] = s.set.region_tag;
  j["n_x"] = s.set.n_x;
  j["n_y"] = s.set.n_y;
  j["n_u"] = s.set.n_u;
  j["points"] = s.set.pairs.size();
  j["band"] = {{"eta", s.band.eta},
               {"fraction_inside", s.band.fraction_inside},
               {"max_perpendicular_deviation", s.band.max_perpendicular_deviation}};
  if (s.slope)
    j["slope_fit"] = {{"slope", s.slope->slope}, {"intercept", s.slope->intercept}, {"rmse", s.slope->rmse}};
  else
    j["slope_fit"] = nullptr;
  j["top_deviations"] = s.top_deviations;
  if (s.overlay_slope) j["overlay_slope"] = *s.overlay_slope;
  j["csv"] = stem + ".csv";
  if (s.set.pairs.empty())
    j["svg"] = nullptr;
  else
    j["svg"] = stem + ".svg";
  return j;
}

std::vector<std::string> stems(const ResultBundle& bundle) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& s : bundle.sets) {
    std::string stem = s.group.empty() ? s.set.name() : s.group + "_" + s.set.name();
    if (!seen.insert(stem).second) throw InvalidArgument("duplicate plot set name '" + stem + "'");
    out.push_back(std::move(stem));
  }
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path.string());
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  out.close();
  if (!out) throw IoError(path.string());
}

}  // namespace

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error("SHA-256 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int k = 0; k < len; ++k) {
    out.push_back(hex[digest[k] >> 4]);
    out.push_back(hex[digest[k] & 15]);
  }
  return out;
}

std::string summary_json(const ResultBundle& bundle) {
  const auto names = stems(bundle);
  ordered_json j;
  j["experiment"] = bundle.experiment;
  ordered_json prov = ordered_json::object();
  for (const auto& [k, v] : bundle.provenance) prov[k] = v;
  j["provenance"] = prov;
  ordered_json sets = ordered_json::array();
  for (std::size_t k = 0; k < bundle.sets.size(); ++k) sets.push_back(set_json(bundle.sets[k], names[k]));
  j["sets"] = sets;
  if (bundle.test) {
    const TestReport& t = *bundle.test;
    j["test"] = {{"E_n", t.E_n},
                 {"F_n", t.F_n},
                 {"p_E", t.p_E},
                 {"p_F", t.p_F},
                 {"n_effective", t.n_effective},
                 {"resamples", t.null_E.size()},
                 {"unconverged_solves", t.unconverged_solves},
                 {"fingerprint", t.fingerprint},
                 {"null_E", t.null_E},
                 {"null_F", t.null_F}};
  } else {
    j["test"] = nullptr;
  }
  ordered_json notes = ordered_json::array();
  for (const auto& n : bundle.notes) notes.push_back({{"stage", n.stage}, {"message", n.message}});
  j["notes"] = notes;
  if (!bundle.timing.empty()) {
    ordered_json timing = ordered_json::object();
    for (const auto& [k, v] : bundle.timing) timing[k] = v;
    j["timing_seconds"] = timing;
  }
  return j.dump(2) + "\n";
}

std::vector<ManifestEntry> write_bundle(const ResultBundle& bundle, const std::string& dir) {
  namespace fs = std::filesystem;
  const fs::path root(dir);
  std::error_code ec;
  fs::create_directories(root, ec);
  if (ec || !fs::is_directory(root)) throw IoError(dir);

  const auto names = stems(bundle);
  std::vector<ManifestEntry> manifest;
  auto emit = [&](const std::string& file, const std::string& data) {
    write_file(root / file, data);
    manifest.push_back({file, data.size(), sha256_hex(data)});
  };
  for (std::size_t k = 0; k < bundle.sets.size(); ++k) {
    const SetSummary& s = bundle.sets[k];
    emit(names[k] + ".csv", plot_set_csv(s.set));
    if (s.set.pairs.empty()) continue;
    SvgOptions opts;
    if (s.overlay_slope) opts.extra_slope = s.overlay_slope;
    emit(names[k] + ".svg", render_svg(s.set, opts));
  }
  emit("summary.json", summary_json(bundle));

  ordered_json m;
  m["files"] = ordered_json::array();
  for (const auto& e : manifest) m["files"].push_back({{"file", e.file}, {"bytes", e.bytes}, {"sha256", e.sha256}});
  write_file(root / "manifest.json", m.dump(2) + "\n");
  return manifest;
}

}  // namespace otqq
