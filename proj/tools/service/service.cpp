#include "service.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "atdecor/corpus.hpp"
#include "atdecor/errors.hpp"
#include "atdecor/json_io.hpp"
#include "atdecor/relax.hpp"
#include "atdecor/solver.hpp"

namespace atdecor::service {

using nlohmann::json;

namespace {

const std::vector<std::string>& run_ops() {
  static const std::vector<std::string> ops = {"solve",           "classify",
                                               "core",            "relax-inclusion",
                                               "relax-inclusion-exact", "relax-maxweak"};
  return ops;
}

Response error(int status, const std::string& message) {
  return {status, json{{"error", message}}};
}

Response parse_error(const ParseError& e) {
  return {422, json{{"error", e.detail()}, {"line", e.line()}, {"column", e.column()}}};
}

// Field access that reports a readable error instead of a json exception.
struct BadRequest {
  std::string message;
};

const json& field(const json& body, const char* key) {
  if (!body.is_object() || !body.contains(key)) throw BadRequest{std::string("missing \"") + key + "\""};
  return body.at(key);
}

std::string string_field(const json& body, const char* key) {
  const json& v = field(body, key);
  if (!v.is_string()) throw BadRequest{std::string("\"") + key + "\" must be a string"};
  return v.get<std::string>();
}

template <typename T>
T optional_field(const json& body, const char* key, T fallback) {
  if (!body.is_object() || !body.contains(key)) return fallback;
  try {
    return body.at(key).get<T>();
  } catch (const json::exception&) {
    throw BadRequest{std::string("\"") + key + "\" has the wrong type"};
  }
}

SolveOptions solve_options(const json& body) {
  SolveOptions o;
  o.seed = optional_field<unsigned long long>(body, "seed", o.seed);
  o.restarts = optional_field<int>(body, "restarts", o.restarts);
  o.iterations = optional_field<int>(body, "iterations", o.iterations);
  o.jobs = std::clamp(optional_field<int>(body, "jobs", o.jobs), 1, 64);
  if (o.restarts < 0 || o.iterations < 0) throw BadRequest{"restarts and iterations must be >= 0"};
  return o;
}

}  // namespace

struct SessionStore::Session {
  struct Entry {
    Predicate predicate;
    bool enabled = true;
  };
  struct Cached {
    long revision = 0;
    json result;
  };

  std::string id;
  AttackTree tree = AttackTree::leaf("root");
  AttributeDomain domain;
  std::vector<Entry> predicates;
  long revision = 0;
  long added = 0;  // ordinal for default ids of added predicates
  std::map<std::string, Cached> results;
  std::vector<Event> events;

  ConstraintSet enabled() const {
    ConstraintSet cs;
    for (const Entry& e : predicates) {
      if (!e.enabled) continue;
      (e.predicate.is_hard() ? cs.hard : cs.soft).push_back(e.predicate);
    }
    return cs;
  }

  json describe() const {
    json preds = json::array();
    for (const Entry& e : predicates) {
      json p = predicate_to_json(e.predicate);
      p["enabled"] = e.enabled;
      preds.push_back(std::move(p));
    }
    return {{"id", id},
            {"revision", revision},
            {"domain", domain.name},
            {"tree", tree_to_json(tree)},
            {"tree_dsl", serialize_tree(tree, -1)},
            {"labels", labels_of(tree).size()},
            {"predicates", std::move(preds)}};
  }

  json snapshot() const {
    json preds = json::array();
    for (const Entry& e : predicates) {
      preds.push_back({{"line", to_line(e.predicate)}, {"enabled", e.enabled}});
    }
    return {{"id", id},           {"revision", revision},
            {"added", added},     {"domain", domain.name},
            {"tree_dsl", serialize_tree(tree, -1)}, {"predicates", std::move(preds)}};
  }
};

namespace {

// Every predicate label must be in the tree and ids must be unique.
template <typename Entries>
void validate(const AttackTree& tree, const Entries& entries) {
  const LabelSet labels = labels_of(tree);
  std::set<std::string> ids;
  for (const auto& e : entries) {
    if (!ids.insert(e.predicate.id).second) {
      throw PreconditionError("duplicate predicate id \"" + e.predicate.id + "\"");
    }
    for (const std::string& l : referenced_labels(e.predicate.formula)) {
      if (labels.count(l) == 0) {
        throw PreconditionError("predicate " + e.predicate.id + " references unknown label \"" + l + "\"");
      }
    }
  }
}

// One predicate-file line; lines without an explicit id get `default_id`.
Predicate single_predicate(const std::string& line, const std::string& default_id) {
  static const std::string kMarker = "\x01";
  const std::vector<Predicate> parsed = parse_predicate_file(line, kMarker);
  if (parsed.size() != 1) throw BadRequest{"\"predicate\" must hold exactly one predicate line"};
  Predicate p = parsed.front();
  if (p.id == kMarker + ".1") p.id = default_id;
  return p;
}

}  // namespace

SessionStore::SessionStore(std::optional<std::filesystem::path> snapshot_dir)
    : snapshot_dir_(std::move(snapshot_dir)) {
  if (snapshot_dir_) {
    std::filesystem::create_directories(*snapshot_dir_);
    load_snapshots();
  }
}

SessionStore::~SessionStore() { shutdown(); }

void SessionStore::shutdown() {
  {
    std::lock_guard<std::mutex> lock(mutex_);
    closed_ = true;
  }
  changed_.notify_all();
}

std::shared_ptr<SessionStore::Session> SessionStore::find(const std::string& id) const {
  const auto it = sessions_.find(id);
  return it == sessions_.end() ? nullptr : it->second;
}

void SessionStore::emit(Session& session, std::string type, json data) {
  session.events.push_back(Event{static_cast<long>(session.events.size()) + 1, std::move(type),
                                 std::move(data)});
  changed_.notify_all();
}

void SessionStore::save(const Session& session) const {
  if (!snapshot_dir_) return;
  const std::filesystem::path path = *snapshot_dir_ / (session.id + ".json");
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp);
    out << session.snapshot().dump(2) << '\n';
  }
  std::filesystem::rename(tmp, path);
}

void SessionStore::load_snapshots() {
  std::vector<std::filesystem::path> files;
  for (const auto& f : std::filesystem::directory_iterator(*snapshot_dir_)) {
    if (f.path().extension() == ".json") files.push_back(f.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& path : files) {
    std::ifstream in(path);
    const json j = json::parse(in);
    auto s = std::make_shared<Session>();
    s->id = j.at("id").get<std::string>();
    s->revision = j.at("revision").get<long>();
    s->added = j.value("added", 0L);
    s->domain = builtin_domain(j.at("domain").get<std::string>());
    s->tree = parse_tree(j.at("tree_dsl").get<std::string>());
    for (const json& p : j.at("predicates")) {
      const std::vector<Predicate> parsed = parse_predicate_file(p.at("line").get<std::string>());
      s->predicates.push_back({parsed.at(0), p.at("enabled").get<bool>()});
    }
    if (s->id.size() > 1 && s->id[0] == 's') {
      next_id_ = std::max(next_id_, std::stol(s->id.substr(1)) + 1);
    }
    sessions_[s->id] = std::move(s);
  }
}

Response SessionStore::create(const json& body) {
  try {
    auto s = std::make_shared<Session>();
    if (body.is_object() && body.contains("corpus")) {
      const CorpusEntry entry = load_corpus(string_field(body, "corpus"));
      s->tree = entry.tree;
      s->domain = entry.domain;
      const ConstraintSet cs = entry.constraints();
      for (const auto* group : {&cs.hard, &cs.soft}) {
        for (const Predicate& p : *group) s->predicates.push_back({p, true});
      }
    } else {
      s->tree = parse_tree(string_field(body, "tree"));
      s->domain = builtin_domain(string_field(body, "domain"));
      std::vector<std::string> sources;
      if (body.contains("predicates")) {
        const json& p = body.at("predicates");
        if (p.is_string()) {
          sources.push_back(p.get<std::string>());
        } else if (p.is_array()) {
          for (const json& item : p) {
            if (!item.is_string()) throw BadRequest{"\"predicates\" entries must be strings"};
            sources.push_back(item.get<std::string>());
          }
        } else {
          throw BadRequest{"\"predicates\" must be a string or an array of strings"};
        }
      }
      for (std::size_t i = 0; i < sources.size(); ++i) {
        const std::string prefix = sources.size() == 1 ? "p" : "p" + std::to_string(i + 1);
        for (Predicate& p : parse_predicate_file(sources[i], prefix)) {
          s->predicates.push_back({std::move(p), true});
        }
      }
    }
    const bool has_hard = std::any_of(s->predicates.begin(), s->predicates.end(),
                                      [](const Session::Entry& e) { return e.predicate.is_hard(); });
    if (!has_hard) {
      // Without explicit hard predicates the tree structure supplies them.
      auto generated = bottom_up_constraints(s->tree, s->domain);
      std::vector<Session::Entry> entries;
      for (Predicate& p : generated) entries.push_back({std::move(p), true});
      s->predicates.insert(s->predicates.begin(), entries.begin(), entries.end());
    }
    validate(s->tree, s->predicates);
    std::lock_guard<std::mutex> lock(mutex_);
    s->id = "s" + std::to_string(next_id_++);
    emit(*s, "created", {{"revision", s->revision}});
    save(*s);
    sessions_[s->id] = s;
    std::size_t hard = 0;
    for (const auto& e : s->predicates) hard += e.predicate.is_hard() ? 1 : 0;
    return {201, json{{"id", s->id},
                      {"revision", s->revision},
                      {"labels", labels_of(s->tree).size()},
                      {"hard", hard},
                      {"soft", s->predicates.size() - hard}}};
  } catch (const ParseError& e) {
    return parse_error(e);
  } catch (const PreconditionError& e) {
    return error(422, e.what());
  } catch (const BadRequest& e) {
    return error(400, e.message);
  }
}

Response SessionStore::get(const std::string& id) const {
  std::lock_guard<std::mutex> lock(mutex_);
  const auto s = find(id);
  if (!s) return error(404, "unknown session \"" + id + "\"");
  return {200, s->describe()};
}

Response SessionStore::mutate(const std::string& id, const json& body) {
  std::lock_guard<std::mutex> lock(mutex_);
  const auto s = find(id);
  if (!s) return error(404, "unknown session \"" + id + "\"");
  try {
    const std::string op = string_field(body, "op");
    std::vector<Session::Entry> next = s->predicates;
    long added = s->added;
    auto entry_index = [&](const std::string& pid) -> std::size_t {
      for (std::size_t i = 0; i < next.size(); ++i) {
        if (next[i].predicate.id == pid) return i;
      }
      throw PreconditionError("unknown predicate id \"" + pid + "\"");
    };
    if (op == "enable" || op == "disable") {
      next[entry_index(string_field(body, "id"))].enabled = op == "enable";
    } else if (op == "remove") {
      next.erase(next.begin() + static_cast<std::ptrdiff_t>(entry_index(string_field(body, "id"))));
    } else if (op == "add") {
      ++added;
      next.push_back({single_predicate(string_field(body, "predicate"), "added." + std::to_string(added)),
                      true});
    } else if (op == "pin") {
      const std::string label = string_field(body, "label");
      const json& value = field(body, "value");
      if (!value.is_number()) throw BadRequest{"\"value\" must be a number"};
      if (labels_of(s->tree).count(label) == 0) {
        throw PreconditionError("unknown label \"" + label + "\"");
      }
      Predicate pin{"pin:" + label, Provenance::kSoftDomainKnowledge,
                    Formula::compare(Expr::ref(label), Cmp::kEq, Expr::constant(value.get<double>()))};
      const auto it = std::find_if(next.begin(), next.end(),
                                   [&](const Session::Entry& e) { return e.predicate.id == pin.id; });
      if (it != next.end()) {
        *it = {std::move(pin), true};
      } else {
        next.push_back({std::move(pin), true});
      }
    } else {
      throw BadRequest{"unknown mutation \"" + op + "\""};
    }
    validate(s->tree, next);
    s->predicates = std::move(next);
    s->added = added;
    ++s->revision;
    emit(*s, "revision", {{"revision", s->revision}, {"op", op}});
    save(*s);
    return {200, json{{"id", s->id}, {"revision", s->revision}}};
  } catch (const ParseError& e) {
    return parse_error(e);
  } catch (const PreconditionError& e) {
    return error(422, e.what());
  } catch (const BadRequest& e) {
    return error(400, e.message);
  }
}

Response SessionStore::run(const std::string& id, const json& body) {
  std::shared_ptr<Session> s;
  AttackTree tree = AttackTree::leaf("root");
  AttributeDomain domain;
  ConstraintSet cs;
  long revision = 0;
  std::string op;
  SolveOptions options;
  std::vector<std::string> order;
  try {
    op = string_field(body, "op");
    if (std::find(run_ops().begin(), run_ops().end(), op) == run_ops().end()) {
      throw BadRequest{"unknown operation \"" + op + "\""};
    }
    options = solve_options(body);
    order = optional_field<std::vector<std::string>>(body, "order", {});
  } catch (const BadRequest& e) {
    return error(400, e.message);
  }
  {
    std::lock_guard<std::mutex> lock(mutex_);
    s = find(id);
    if (!s) return error(404, "unknown session \"" + id + "\"");
    tree = s->tree;
    domain = s->domain;
    cs = s->enabled();
    revision = s->revision;
    emit(*s, "run-started", {{"op", op}, {"revision", revision}});
  }
  options.on_progress = [this, s, op](int restarts, double best) {
    std::lock_guard<std::mutex> lock(mutex_);
    emit(*s, "progress",
         {{"op", op}, {"restarts", restarts}, {"best_residual", std::isfinite(best) ? json(best) : json()}});
  };

  json result;
  int status = 200;
  try {
    if (op == "solve") {
      result = to_json(solve(tree, domain, cs, options));
    } else if (op == "classify") {
      result = to_json(classify(tree, domain, cs, options));
    } else if (op == "core") {
      result = to_json(unsat_core(tree, domain, cs, options));
    } else if (op == "relax-inclusion") {
      result = to_json(relax_inclusion_greedy(tree, domain, cs, order, options));
    } else if (op == "relax-inclusion-exact") {
      result = to_json(relax_inclusion_exact(tree, domain, cs, options));
    } else {
      const MaxWeakResult r = relax_maxweak(tree, domain, cs, options);
      result = to_json(r);
      result["verification"] = to_json(verify_weakening(cs, r));
    }
  } catch (const PreconditionError& e) {
    status = 422;
    result = {{"error", e.what()}};
  } catch (const NumericError& e) {
    status = 500;
    result = {{"error", e.what()}};
  }

  std::lock_guard<std::mutex> lock(mutex_);
  emit(*s, "run-finished", {{"op", op}, {"revision", revision}, {"http_status", status}});
  if (status != 200) return {status, result};
  s->results[op] = Session::Cached{revision, result};
  return {200, json{{"op", op}, {"revision", revision}, {"stale", revision != s->revision},
                    {"result", std::move(result)}}};
}

Response SessionStore::result(const std::string& id, const std::string& op) const {
  std::lock_guard<std::mutex> lock(mutex_);
  const auto s = find(id);
  if (!s) return error(404, "unknown session \"" + id + "\"");
  const auto it = s->results.find(op);
  if (it == s->results.end()) return error(404, "no \"" + op + "\" result for session " + id);
  return {200, json{{"op", op},
                    {"revision", it->second.revision},
                    {"stale", it->second.revision != s->revision},
                    {"result", it->second.result}}};
}

std::optional<std::vector<Event>> SessionStore::events(const std::string& id, long after,
                                                       std::chrono::milliseconds wait) const {
  std::unique_lock<std::mutex> lock(mutex_);
  const auto s = find(id);
  if (!s || closed_) return std::nullopt;
  auto pending = [&] { return closed_ || static_cast<long>(s->events.size()) > after; };
  if (!pending()) changed_.wait_for(lock, wait, pending);
  if (closed_) return std::nullopt;
  std::vector<Event> out;
  for (const Event& e : s->events) {
    if (e.id > after) out.push_back(e);
  }
  return out;
}

// ---------------------------------------------------------------------------

struct Server::Impl {
  SessionStore& store;
  httplib::Server http;
  std::atomic<bool> stopping{false};

  explicit Impl(SessionStore& s) : store(s) {}
};

namespace {

void reply(httplib::Response& res, const Response& r) {
  res.status = r.status;
  res.set_content(r.body.dump(), "application/json");
}

std::optional<json> parse_body(const httplib::Request& req, httplib::Response& res) {
  try {
    return req.body.empty() ? json::object() : json::parse(req.body);
  } catch (const json::parse_error& e) {
    reply(res, error(400, std::string("malformed JSON body: ") + e.what()));
    return std::nullopt;
  }
}

std::string sse_frame(const Event& e) {
  std::ostringstream out;
  out << "id: " << e.id << "\nevent: " << e.type << "\ndata: " << e.data.dump() << "\n\n";
  return out.str();
}

}  // namespace

Server::Server(SessionStore& store) : impl_(std::make_unique<Impl>(store)) {
  auto& http = impl_->http;
  Impl* impl = impl_.get();

  http.Post("/sessions", [impl](const httplib::Request& req, httplib::Response& res) {
    if (const auto body = parse_body(req, res)) reply(res, impl->store.create(*body));
  });
  http.Get(R"(/sessions/([^/]+))", [impl](const httplib::Request& req, httplib::Response& res) {
    reply(res, impl->store.get(req.matches[1]));
  });
  http.Post(R"(/sessions/([^/]+)/mutations)",
            [impl](const httplib::Request& req, httplib::Response& res) {
              if (const auto body = parse_body(req, res)) {
                reply(res, impl->store.mutate(req.matches[1], *body));
              }
            });
  http.Post(R"(/sessions/([^/]+)/run)", [impl](const httplib::Request& req, httplib::Response& res) {
    if (const auto body = parse_body(req, res)) reply(res, impl->store.run(req.matches[1], *body));
  });
  http.Get(R"(/sessions/([^/]+)/results/([^/]+))",
           [impl](const httplib::Request& req, httplib::Response& res) {
             reply(res, impl->store.result(req.matches[1], req.matches[2]));
           });
  // Server-sent events. `after` skips already-seen ids; `follow=0` ends the
  // stream once the backlog is written.
  http.Get(R"(/sessions/([^/]+)/events)", [impl](const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1];
    if (!impl->store.events(id, 0, std::chrono::milliseconds(0))) {
      reply(res, error(404, "unknown session \"" + id + "\""));
      return;
    }
    long after = 0;
    if (req.has_param("after")) after = std::stol(req.get_param_value("after"));
    if (req.has_header("Last-Event-ID")) after = std::stol(req.get_header_value("Last-Event-ID"));
    const bool follow = !(req.has_param("follow") && req.get_param_value("follow") == "0");
    auto last = std::make_shared<long>(after);
    res.set_chunked_content_provider(
        "text/event-stream", [impl, id, follow, last](std::size_t, httplib::DataSink& sink) {
          const auto batch =
              impl->store.events(id, *last, std::chrono::milliseconds(follow ? 250 : 0));
          if (!batch || impl->stopping) {
            sink.done();
            return true;
          }
          for (const Event& e : *batch) {
            const std::string frame = sse_frame(e);
            if (!sink.write(frame.data(), frame.size())) return false;
            *last = e.id;
          }
          if (!follow && batch->empty()) sink.done();
          return true;
        });
  });
}

Server::~Server() { stop(); }

int Server::bind(const std::string& host, int port) {
  if (port == 0) return impl_->http.bind_to_any_port(host);
  return impl_->http.bind_to_port(host, port) ? port : -1;
}

bool Server::listen() { return impl_->http.listen_after_bind(); }

void Server::stop() {
  impl_->stopping = true;
  if (impl_->http.is_running()) impl_->http.stop();
}

}  // namespace atdecor::service
