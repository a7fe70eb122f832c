#include "spilab/io.hpp"

#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "json.hpp"
#include "spilab/digest.hpp"
#include "spilab/errors.hpp"

namespace spilab {
namespace {

using nlohmann::json;

json parse_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("cannot parse " + path + ": " + e.what());
  }
}

const json& field(const json& j, const char* key, const std::string& path) {
  auto it = j.find(key);
  if (it == j.end()) throw ConfigError(path + ": missing field '" + key + "'");
  return *it;
}

int field_int(const json& j, const char* key, const std::string& path) {
  const json& f = field(j, key, path);
  if (!f.is_number_integer()) {
    throw ConfigError(path + ": field '" + key + "' must be an integer");
  }
  return f.get<int>();
}

double field_double(const json& j, const char* key, const std::string& path) {
  const json& f = field(j, key, path);
  if (!f.is_number()) throw ConfigError(path + ": field '" + key + "' must be a number");
  return f.get<double>();
}

// Flattens a dims-shaped nested numeric array into out (row-major).
void read_tensor(const json& j, const char* key, const std::vector<int>& dims,
                 std::vector<double>& out, const std::string& path) {
  const std::string shape_error = path + ": field '" + std::string(key) + "' must be a " +
                                  [&dims] {
                                    std::string s;
                                    for (std::size_t i = 0; i < dims.size(); ++i) {
                                      if (i > 0) s += " x ";
                                      s += std::to_string(dims[i]);
                                    }
                                    return s;
                                  }() +
                                  " numeric array";
  out.clear();
  const std::function<void(const json&, std::size_t)> walk = [&](const json& node,
                                                                 std::size_t depth) {
    if (depth == dims.size()) {
      if (!node.is_number()) throw ConfigError(shape_error);
      out.push_back(node.get<double>());
      return;
    }
    if (!node.is_array() || static_cast<int>(node.size()) != dims[depth]) {
      throw ConfigError(shape_error);
    }
    for (const json& child : node) walk(child, depth + 1);
  };
  walk(field(j, key, path), 0);
}

// Nests a row-major flat array back into dims-shaped JSON.
json write_tensor(const std::vector<double>& data, const std::vector<int>& dims) {
  std::size_t pos = 0;
  const std::function<json(std::size_t)> build = [&](std::size_t depth) {
    json node = json::array();
    if (depth + 1 == dims.size()) {
      for (int i = 0; i < dims[depth]; ++i) node.push_back(data[pos++]);
    } else {
      for (int i = 0; i < dims[depth]; ++i) node.push_back(build(depth + 1));
    }
    return node;
  };
  return dims.empty() ? json::array() : build(0);
}

FiniteMdp mdp_from_json(const json& j, const std::string& path) {
  FiniteMdp mdp;
  mdp.n_states = field_int(j, "n_states", path);
  mdp.n_actions = field_int(j, "n_actions", path);
  mdp.discount = field_double(j, "discount", path);
  mdp.initial_state = field_int(j, "initial_state", path);
  if (j.contains("reset_state") && !j["reset_state"].is_null()) {
    mdp.reset_state = field_int(j, "reset_state", path);
  }
  if (mdp.n_states <= 0 || mdp.n_actions <= 0) {
    throw ConfigError(path + ": n_states and n_actions must be positive");
  }
  read_tensor(j, "transition", {mdp.n_states, mdp.n_actions, mdp.n_states}, mdp.transition, path);
  read_tensor(j, "reward", {mdp.n_states, mdp.n_actions}, mdp.reward, path);
  try {
    mdp.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return mdp;
}

json mdp_to_json(const FiniteMdp& mdp) {
  json j;
  j["n_states"] = mdp.n_states;
  j["n_actions"] = mdp.n_actions;
  j["discount"] = mdp.discount;
  j["initial_state"] = mdp.initial_state;
  if (mdp.episodic()) j["reset_state"] = *mdp.reset_state;
  j["transition"] = write_tensor(mdp.transition, {mdp.n_states, mdp.n_actions, mdp.n_states});
  j["reward"] = write_tensor(mdp.reward, {mdp.n_states, mdp.n_actions});
  return j;
}

void write_json_file(const json& j, const std::string& path) {
  write_text_file(path, j.dump(2) + "\n");
}

}  // namespace

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open " + path + " for writing");
  out << content;
  out.flush();
  if (!out) throw std::runtime_error("failed while writing " + path);
}

FiniteMdp load_mdp(const std::string& path) { return mdp_from_json(parse_json_file(path), path); }

void save_mdp(const FiniteMdp& mdp, const std::string& path) {
  write_json_file(mdp_to_json(mdp), path);
}

TabularPolicy load_policy(const std::string& path) {
  const json j = parse_json_file(path);
  TabularPolicy policy;
  policy.n_states = field_int(j, "n_states", path);
  policy.n_actions = field_int(j, "n_actions", path);
  if (policy.n_states <= 0 || policy.n_actions <= 0) {
    throw ConfigError(path + ": n_states and n_actions must be positive");
  }
  read_tensor(j, "probs", {policy.n_states, policy.n_actions}, policy.probs, path);
  try {
    policy.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return policy;
}

void save_policy(const TabularPolicy& policy, const std::string& path) {
  json j;
  j["n_states"] = policy.n_states;
  j["n_actions"] = policy.n_actions;
  j["probs"] = write_tensor(policy.probs, {policy.n_states, policy.n_actions});
  write_json_file(j, path);
}

Encoder load_encoder(const std::string& path) {
  const json j = parse_json_file(path);
  Encoder encoder;
  encoder.n_latent = field_int(j, "n_latent", path);
  const json& mapping = field(j, "mapping", path);
  if (!mapping.is_array()) throw ConfigError(path + ": field 'mapping' must be an array");
  for (const json& entry : mapping) {
    if (!entry.is_number_integer()) {
      throw ConfigError(path + ": field 'mapping' must hold integers");
    }
    encoder.mapping.push_back(entry.get<int>());
  }
  try {
    encoder.validate(encoder.n_ground());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return encoder;
}

void save_encoder(const Encoder& encoder, const std::string& path) {
  json j;
  j["n_latent"] = encoder.n_latent;
  j["mapping"] = encoder.mapping;
  write_json_file(j, path);
}

LatentMdp load_latent(const std::string& path) {
  const json j = parse_json_file(path);
  LatentMdp latent;
  latent.model = mdp_from_json(field(j, "model", path), path);
  read_tensor(j, "metric", {latent.model.n_states, latent.model.n_states}, latent.metric, path);
  try {
    latent.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return latent;
}

void save_latent(const LatentMdp& latent, const std::string& path) {
  json j;
  j["model"] = mdp_to_json(latent.model);
  j["metric"] = write_tensor(latent.metric, {latent.model.n_states, latent.model.n_states});
  write_json_file(j, path);
}

TransitionBatch load_transitions_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line != "s,a,r,s_next") {
    throw ConfigError(path + ": expected header 's,a,r,s_next'");
  }
  TransitionBatch batch;
  int line_number = 1;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(fields, cell, ',')) cells.push_back(cell);
    const std::string where = path + " line " + std::to_string(line_number);
    if (cells.size() != 4) throw ConfigError(where + ": expected 4 comma-separated values");
    try {
      std::size_t used = 0;
      TransitionBatch::Row row;
      row.s = std::stoi(cells[0], &used);
      if (used != cells[0].size()) throw std::invalid_argument(cells[0]);
      row.a = std::stoi(cells[1], &used);
      if (used != cells[1].size()) throw std::invalid_argument(cells[1]);
      row.r = std::stod(cells[2], &used);
      if (used != cells[2].size()) throw std::invalid_argument(cells[2]);
      row.s_next = std::stoi(cells[3], &used);
      if (used != cells[3].size()) throw std::invalid_argument(cells[3]);
      batch.rows.push_back(row);
    } catch (const std::exception&) {
      throw ConfigError(where + ": malformed number");
    }
  }
  return batch;
}

void save_transitions_csv(const TransitionBatch& batch, const std::string& path) {
  std::ostringstream out;
  out << "s,a,r,s_next\n";
  for (const TransitionBatch::Row& row : batch.rows) {
    out << row.s << ',' << row.a << ',' << format_double(row.r) << ',' << row.s_next << '\n';
  }
  write_text_file(path, out.str());
}

std::string loss_report_json(const LossReport& report) {
  json j;
  j["l_r"] = report.l_r;
  j["l_p"] = report.l_p;
  j["source"] = report.source == LossReport::Source::exact ? "exact" : "empirical";
  j["sample_count"] = report.sample_count;
  return j.dump(2) + "\n";
}

std::string bound_report_json(const BoundReport& report) {
  json j;
  j["name"] = report.name;
  j["lhs"] = report.lhs;
  j["rhs"] = report.rhs;
  j["holds"] = report.holds;
  j["slack"] = report.slack;
  j["vacuous"] = report.vacuous;
  j["inputs_digest"] = report.inputs_digest;
  j["components"] = json(report.components);
  return j.dump(2) + "\n";
}

}  // namespace spilab
