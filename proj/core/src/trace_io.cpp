#include "modsim/trace_io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace modsim {

namespace {

const char* admit_name(AdmitTarget a) {
  switch (a) {
    case AdmitTarget::review: return "review";
    case AdmitTarget::label: return "label";
    default: return nullptr;
  }
}

AdmitTarget admit_from(const nlohmann::json& j) {
  if (j.is_null()) return AdmitTarget::none;
  std::string s = j.get<std::string>();
  if (s == "review") return AdmitTarget::review;
  if (s == "label") return AdmitTarget::label;
  throw std::runtime_error("bad admit tag in trace: " + s);
}

}  // namespace

void write_trace(const Trace& trace, std::ostream& out) {
  nlohmann::json header{{"kind", "header"},
                        {"seed", trace.seed},
                        {"policy", trace.policy_name},
                        {"policy_params", trace.policy_params},
                        {"env", trace.env},
                        {"final_queued", trace.final_queued},
                        {"env_stream_hash", trace.env_stream_hash}};
  out << header.dump() << '\n';
  const int num_types = static_cast<int>(trace.env.types.size());
  for (Period t = 1; t <= trace.horizon(); ++t) {
    const PeriodRecord& rec = trace.periods[static_cast<std::size_t>(t - 1)];
    nlohmann::json j{{"kind", "period"}, {"t", t}};
    j["arrival"] = rec.arrival_type < 0 ? nlohmann::json(nullptr)
                                        : nlohmann::json(rec.arrival_type);
    j["Y"] = rec.classify == Classification::keep ? 1 : 0;
    const char* a = admit_name(rec.admit);
    j["admit"] = a ? nlohmann::json(a) : nlohmann::json(nullptr);
    j["M"] = rec.scheduled < 0 ? nlohmann::json(nullptr)
                               : nlohmann::json(rec.scheduled);
    j["S"] = rec.reviewed < 0 ? nlohmann::json(nullptr)
                              : nlohmann::json(rec.reviewed);
    std::vector<std::uint32_t> q(num_types);
    for (int k = 0; k < num_types; ++k) q[k] = trace.queue_len_at(t, k);
    j["q"] = q;
    j["qld"] = static_cast<int>(rec.label_len_begin);
    out << j.dump() << '\n';
  }
  for (const Post& post : trace.posts) {
    nlohmann::json j{{"kind", "post"},
                     {"id", post.id},
                     {"type", post.type_id},
                     {"t", post.arrival_period},
                     {"cost", post.true_cost},
                     {"keep", post.initial_class == Classification::keep}};
    const char* a = admit_name(post.admitted);
    j["admit"] = a ? nlohmann::json(a) : nlohmann::json(nullptr);
    j["review_t"] = post.reviewed() ? nlohmann::json(post.review_period)
                                    : nlohmann::json(nullptr);
    out << j.dump() << '\n';
  }
}

void write_trace_file(const Trace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write trace file: " + path);
  write_trace(trace, out);
}

Trace read_trace(std::istream& in) {
  Trace trace;
  std::string line;
  bool have_header = false;
  int num_types = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line);
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "header") {
      trace.env = j.at("env").get<EnvConfig>();
      trace.seed = j.at("seed").get<std::uint64_t>();
      trace.policy_name = j.at("policy").get<std::string>();
      trace.policy_params = j.value("policy_params", nlohmann::json::object());
      trace.final_queued = j.at("final_queued").get<std::int64_t>();
      trace.env_stream_hash = j.at("env_stream_hash").get<std::uint64_t>();
      num_types = static_cast<int>(trace.env.types.size());
      have_header = true;
    } else if (kind == "period") {
      if (!have_header) throw std::runtime_error("trace period before header");
      PeriodRecord rec;
      if (!j.at("arrival").is_null()) rec.arrival_type = j.at("arrival").get<int>();
      rec.classify = j.at("Y").get<int>() == 1 ? Classification::keep
                                               : Classification::remove;
      rec.admit = admit_from(j.at("admit"));
      if (!j.at("M").is_null()) rec.scheduled = j.at("M").get<PostId>();
      if (!j.at("S").is_null()) rec.reviewed = j.at("S").get<PostId>();
      rec.label_len_begin = static_cast<std::uint8_t>(j.at("qld").get<int>());
      auto q = j.at("q").get<std::vector<std::uint32_t>>();
      if (static_cast<int>(q.size()) != num_types)
        throw std::runtime_error("trace queue snapshot has wrong width");
      for (std::uint32_t v : q) trace.queue_len_begin.push_back(v);
      trace.periods.push_back(rec);
    } else if (kind == "post") {
      if (!have_header) throw std::runtime_error("trace post before header");
      Post post;
      post.id = j.at("id").get<PostId>();
      post.type_id = j.at("type").get<int>();
      post.arrival_period = j.at("t").get<Period>();
      post.true_cost = j.at("cost").get<double>();
      post.initial_class = j.at("keep").get<bool>() ? Classification::keep
                                                    : Classification::remove;
      post.admitted = admit_from(j.at("admit"));
      if (!j.at("review_t").is_null())
        post.review_period = j.at("review_t").get<Period>();
      trace.posts.push_back(post);
    } else {
      throw std::runtime_error("unknown trace record kind: " + kind);
    }
  }
  if (!have_header) throw std::runtime_error("trace has no header record");
  return trace;
}

Trace read_trace_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trace file: " + path);
  return read_trace(in);
}

}  // namespace modsim
