#include "marlaudit/wire_format.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "marlaudit/errors.hpp"

namespace marlaudit {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

template <typename T>
T field(const json& obj, const char* key, std::size_t line) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(std::string("missing key '") + key + "'", line);
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw ParseError(std::string("key '") + key + "' has the wrong type", line);
  }
}

std::int64_t integer_field(const json& obj, const char* key, std::size_t line) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(std::string("missing key '") + key + "'", line);
  if (!it->is_number_integer()) throw ParseError(std::string("key '") + key + "' must be an integer", line);
  return it->get<std::int64_t>();
}

std::vector<double> real_array(const json& v, const char* key, std::size_t line) {
  if (!v.is_array()) throw ParseError(std::string("key '") + key + "' must be an array of numbers", line);
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& x : v) {
    if (!x.is_number()) throw ParseError(std::string("key '") + key + "' must be an array of numbers", line);
    out.push_back(x.get<double>());
  }
  return out;
}

void reject_unknown_keys(const json& obj, std::initializer_list<const char*> allowed, std::size_t line) {
  for (const auto& [k, v] : obj.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return k == a; }))
      throw ParseError("unexpected key '" + k + "'", line);
  }
}

AgentSpec parse_agent(const json& a) {
  if (!a.is_object()) throw ParseError("manifest: agent entry must be an object", 0);
  reject_unknown_keys(a, {"action_space", "obs_dim", "hidden_dim"}, 0);
  AgentSpec spec;
  const auto& as = a.at("action_space");
  if (!as.is_object()) throw ParseError("manifest: action_space must be an object", 0);
  const auto type = field<std::string>(as, "type", 0);
  // The size key is accepted as "n" (discrete), "dim" (continuous) or "n_or_dim".
  auto size_of = [&](const char* preferred) -> int {
    for (const char* key : {preferred, "n_or_dim"})
      if (as.contains(key)) return static_cast<int>(integer_field(as, key, 0));
    throw ParseError(std::string("manifest: action_space missing '") + preferred + "'", 0);
  };
  if (type == "discrete")
    spec.action_space = DiscreteSpace{size_of("n")};
  else if (type == "continuous")
    spec.action_space = ContinuousSpace{size_of("dim")};
  else
    throw ParseError("manifest: unknown action_space type '" + type + "'", 0);
  spec.obs_dim = static_cast<int>(integer_field(a, "obs_dim", 0));
  spec.hidden_dim = static_cast<int>(integer_field(a, "hidden_dim", 0));
  return spec;
}

// Splits text into lines, reporting 1-based numbers.
template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t line = 0, pos = 0;
  while (pos < text.size()) {
    const auto nl = text.find('\n', pos);
    const auto end = nl == std::string_view::npos ? text.size() : nl;
    ++line;
    fn(text.substr(pos, end - pos), line);
    pos = end + 1;
  }
}

}  // namespace

Manifest parse_manifest(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("manifest: ") + e.what(), 0);
  }
  if (!j.is_object()) throw ParseError("manifest: top level must be an object", 0);
  reject_unknown_keys(j, {"scenario", "algorithm", "architecture", "seed", "num_agents", "agents", "checkpoint_fraction"},
                      0);
  Manifest m;
  m.scenario = field<std::string>(j, "scenario", 0);
  m.algorithm = field<std::string>(j, "algorithm", 0);
  m.architecture = field<std::string>(j, "architecture", 0);
  m.seed = integer_field(j, "seed", 0);
  m.num_agents = static_cast<int>(integer_field(j, "num_agents", 0));
  const auto& agents = j.at("agents");
  if (!agents.is_array()) throw ParseError("manifest: 'agents' must be an array", 0);
  for (const auto& a : agents) m.agents.push_back(parse_agent(a));
  const auto cf = j.find("checkpoint_fraction");
  if (cf == j.end() || !cf->is_number()) throw ParseError("manifest: 'checkpoint_fraction' must be a number", 0);
  m.checkpoint_fraction = cf->get<double>();
  validate_manifest(m);
  return m;
}

TrajectoryDataset parse_dataset(std::string_view manifest_text, std::string_view episodes_text) {
  TrajectoryDataset d;
  d.manifest = parse_manifest(manifest_text);
  const std::size_t na = d.num_agents();

  std::map<std::int64_t, std::vector<std::vector<StepRecord>>> grouped;
  for_each_line(episodes_text, [&](std::string_view raw, std::size_t line) {
    if (raw.find_first_not_of(" \t\r") == std::string_view::npos) return;
    json j;
    try {
      j = json::parse(raw);
    } catch (const json::parse_error& e) {
      throw ParseError(e.what(), line);
    }
    if (!j.is_object()) throw ParseError("record must be a JSON object", line);
    reject_unknown_keys(j, {"episode", "agent", "t", "obs", "action", "hidden"}, line);
    const auto episode = integer_field(j, "episode", line);
    const auto agent = integer_field(j, "agent", line);
    StepRecord s;
    s.t = integer_field(j, "t", line);
    if (agent < 0 || static_cast<std::size_t>(agent) >= na)
      throw ValidationError("line " + std::to_string(line) + ": episode " + std::to_string(episode) + " agent " +
                            std::to_string(agent) + ": agent index out of range");
    if (s.t < 0) throw ParseError("'t' must be nonnegative", line);
    if (!j.contains("obs")) throw ParseError("missing key 'obs'", line);
    s.obs = real_array(j["obs"], "obs", line);
    if (!j.contains("action")) throw ParseError("missing key 'action'", line);
    const auto& a = j["action"];
    if (a.is_number_integer())
      s.action = a.get<std::int64_t>();
    else if (a.is_array())
      s.action = real_array(a, "action", line);
    else
      throw ParseError("'action' must be an integer or an array of numbers", line);
    if (j.contains("hidden")) s.hidden = real_array(j["hidden"], "hidden", line);
    auto& per_agent = grouped[episode];
    per_agent.resize(na);
    per_agent[static_cast<std::size_t>(agent)].push_back(std::move(s));
  });

  for (auto& [id, agents] : grouped) {
    Episode ep;
    ep.episode_id = id;
    for (std::size_t i = 0; i < agents.size(); ++i) {
      auto& steps = agents[i];
      std::stable_sort(steps.begin(), steps.end(), [](const auto& a, const auto& b) { return a.t < b.t; });
      for (std::size_t k = 1; k < steps.size(); ++k)
        if (steps[k].t == steps[k - 1].t)
          throw ValidationError("episode " + std::to_string(id) + " agent " + std::to_string(i) + " t " +
                                std::to_string(steps[k].t) + ": duplicate timestep");
    }
    ep.agents = std::move(agents);
    d.episodes.push_back(std::move(ep));
  }
  validate_dataset(d);
  return d;
}

std::string serialize_manifest(const Manifest& m) {
  ordered_json j;
  j["scenario"] = m.scenario;
  j["algorithm"] = m.algorithm;
  j["architecture"] = m.architecture;
  j["seed"] = m.seed;
  j["num_agents"] = m.num_agents;
  j["agents"] = ordered_json::array();
  for (const auto& a : m.agents) {
    ordered_json as;
    if (const auto* d = std::get_if<DiscreteSpace>(&a.action_space)) {
      as["type"] = "discrete";
      as["n"] = d->n;
    } else {
      as["type"] = "continuous";
      as["dim"] = std::get<ContinuousSpace>(a.action_space).dim;
    }
    ordered_json aj;
    aj["action_space"] = std::move(as);
    aj["obs_dim"] = a.obs_dim;
    aj["hidden_dim"] = a.hidden_dim;
    j["agents"].push_back(std::move(aj));
  }
  j["checkpoint_fraction"] = m.checkpoint_fraction;
  return j.dump(2) + "\n";
}

std::string serialize_episodes(const TrajectoryDataset& d) {
  std::string out;
  for (const auto& ep : d.episodes) {
    for (std::size_t t = 0; t < ep.length(); ++t) {
      for (std::size_t i = 0; i < ep.agents.size(); ++i) {
        const auto& s = ep.agents[i][t];
        ordered_json j;
        j["episode"] = ep.episode_id;
        j["agent"] = i;
        j["t"] = s.t;
        j["obs"] = s.obs;
        if (const auto* a = std::get_if<std::int64_t>(&s.action))
          j["action"] = *a;
        else
          j["action"] = std::get<std::vector<double>>(s.action);
        if (!s.hidden.empty()) j["hidden"] = s.hidden;
        out += j.dump();
        out += '\n';
      }
    }
  }
  return out;
}

std::string read_text_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& p, std::string_view text) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + p.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

TrajectoryDataset load_dataset(const std::filesystem::path& dir) {
  const auto manifest = read_text_file(dir / kManifestFile);
  const auto episodes = read_text_file(dir / kEpisodesFile);
  try {
    return parse_dataset(manifest, episodes);
  } catch (const ParseError& e) {
    throw ParseError(e.detail(), e.line(), (dir / (e.line() ? kEpisodesFile : kManifestFile)).string() + ": ");
  } catch (const ValidationError& e) {
    throw ValidationError(dir.string() + ": " + e.what());
  }
}

void write_dataset(const TrajectoryDataset& d, const std::filesystem::path& dir) {
  validate_dataset(d);
  write_text_file(dir / kManifestFile, serialize_manifest(d.manifest));
  write_text_file(dir / kEpisodesFile, serialize_episodes(d));
}

}  // namespace marlaudit
