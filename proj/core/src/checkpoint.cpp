#include "storval/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

#include "storval/errors.hpp"

namespace storval {

using nlohmann::json;

std::string cuts_to_json(const CutPool& pool, int indent) {
  json doc = json::array();
  for (int t = 0; t < pool.horizon(); ++t) {
    for (std::size_t j = 0; j < pool.node_count(t); ++j) {
      json cuts = json::array();
      for (const auto& c : pool.at(t, j)) {
        cuts.push_back({{"intercept", c.intercept},
                        {"grad_wealth", c.grad_wealth},
                        {"grad_energy", c.grad_energy},
                        {"iteration", c.origin_iteration}});
      }
      doc.push_back({{"stage", t}, {"node", j}, {"cuts", std::move(cuts)}});
    }
  }
  return doc.dump(indent);
}

CutPool cuts_from_json(const std::string& text, const MarkovChain& chain) {
  CutPool pool(chain);
  try {
    const json doc = json::parse(text);
    if (!doc.is_array()) fail(ErrorKind::DataError, "checkpoint must be a JSON array");
    for (const auto& entry : doc) {
      const int stage = entry.at("stage").get<int>();
      const auto node = entry.at("node").get<std::size_t>();
      if (stage < 0 || stage >= pool.horizon() || node >= pool.node_count(stage)) {
        fail(ErrorKind::DataError, "checkpoint entry (" + std::to_string(stage) + ", " + std::to_string(node) +
                                       ") does not fit the chain");
      }
      for (const auto& c : entry.at("cuts")) {
        Cut cut;
        cut.intercept = c.at("intercept").get<double>();
        cut.grad_wealth = c.at("grad_wealth").get<double>();
        cut.grad_energy = c.at("grad_energy").get<double>();
        cut.origin_iteration = c.value("iteration", 0);
        pool.add(stage, node, cut);
      }
    }
  } catch (const json::exception& e) {
    fail(ErrorKind::DataError, std::string("malformed checkpoint: ") + e.what());
  }
  return pool;
}

void save_checkpoint(const std::filesystem::path& path, const CutPool& pool) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::DataError, "cannot write checkpoint " + path.string());
  out << cuts_to_json(pool) << '\n';
}

CutPool load_checkpoint(const std::filesystem::path& path, const MarkovChain& chain) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::DataError, "cannot read checkpoint " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return cuts_from_json(buf.str(), chain);
}

}  // namespace storval
