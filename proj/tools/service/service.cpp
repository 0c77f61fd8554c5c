#include "service.h"

#include <httplib.h>

#include <condition_variable>
#include <cstdio>
#include <deque>
#include <fstream>
#include <functional>
#include <json.hpp>
#include <map>
#include <mutex>
#include <regex>
#include <sstream>
#include <thread>

#include <hoi/silhouette/silhouette.h>

namespace hoi {

namespace {

using Json = nlohmann::json;

constexpr const char* kVersionHeader = "X-Session-Version";
constexpr const char* kId = "([A-Za-z0-9_-]+)";

struct HttpError {
  int status;
  std::string code;
  std::string message;
};

[[noreturn]] void fail(int status, const std::string& code, const std::string& message) {
  throw HttpError{status, code, message};
}

int statusFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::IoError:
      return 500;
    case ErrorCode::UnderConstrained:
      return 422;
    default:
      return 400;
  }
}

std::string readFile(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string frameFile(int frame) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "frame_%04d.png", frame);
  return buf;
}

bool hasAnnotations(const AnnotationSet& set) {
  if (!set.pairs.empty()) return true;
  for (const Track2D& t : set.tracks) {
    for (const TrackPoint& p : t.points) {
      if (p.valid) return true;
    }
  }
  return false;
}

struct SessionEntry {
  std::filesystem::path dir;
  std::mutex writer;   // one annotation writer at a time
  std::mutex results;  // guards results/ as a pair of files
  std::mutex snapshotLock;
  std::shared_ptr<const SceneSession> current;

  std::shared_ptr<const SceneSession> snapshot() {
    std::lock_guard lock(snapshotLock);
    return current;
  }
  void commit(std::shared_ptr<const SceneSession> s) {
    std::lock_guard lock(snapshotLock);
    current = std::move(s);
  }
};

struct Job {
  std::string id;
  std::string session;
  int sessionVersion = 0;
  std::string status = "queued";
  std::string error;
};

Json jobJson(const Job& j) {
  Json out = {{"id", j.id}, {"session", j.session}, {"session_version", j.sessionVersion}, {"status", j.status}};
  if (j.status == "succeeded") out["result"] = "/sessions/" + j.session + "/results";
  if (j.status == "failed") out["error"] = j.error;
  return out;
}

}  // namespace

struct SessionService::Impl {
  ServiceOptions options;
  httplib::Server server;

  std::mutex sessionsLock;
  std::map<std::string, std::shared_ptr<SessionEntry>> sessions;

  std::mutex jobsLock;
  std::map<std::string, Job> jobs;
  int nextJob = 1;

  std::mutex queueLock;
  std::condition_variable queueReady;
  std::condition_variable queueIdle;
  std::deque<std::function<void()>> queue;
  int running = 0;
  bool stopping = false;
  std::vector<std::thread> workers;

  explicit Impl(ServiceOptions o) : options(std::move(o)) {
    for (int i = 0; i < std::max(1, options.workers); ++i) workers.emplace_back([this] { workerLoop(); });
    routes();
  }

  ~Impl() {
    {
      std::lock_guard lock(queueLock);
      stopping = true;
    }
    queueReady.notify_all();
    for (std::thread& t : workers) t.join();
  }

  void workerLoop() {
    for (;;) {
      std::function<void()> task;
      {
        std::unique_lock lock(queueLock);
        queueReady.wait(lock, [&] { return stopping || !queue.empty(); });
        if (queue.empty()) return;
        task = std::move(queue.front());
        queue.pop_front();
        ++running;
      }
      task();
      {
        std::lock_guard lock(queueLock);
        --running;
      }
      queueIdle.notify_all();
    }
  }

  void enqueue(std::function<void()> task) {
    {
      std::lock_guard lock(queueLock);
      queue.push_back(std::move(task));
    }
    queueReady.notify_one();
  }

  std::filesystem::path sessionFile(const std::string& id) const {
    return options.dataDir / id / "session.json";
  }

  // Loaded on first use; null when the directory has no session.
  std::shared_ptr<SessionEntry> find(const std::string& id) {
    std::lock_guard lock(sessionsLock);
    auto it = sessions.find(id);
    if (it != sessions.end()) return it->second;
    if (!std::filesystem::exists(sessionFile(id))) return nullptr;
    auto entry = std::make_shared<SessionEntry>();
    entry->dir = options.dataDir / id;
    try {
      entry->current = std::make_shared<const SceneSession>(loadSession(sessionFile(id)));
    } catch (const Error& e) {
      fail(500, std::string(toString(e.code())), std::string("stored session is unreadable: ") + e.what());
    }
    sessions[id] = entry;
    return entry;
  }

  std::shared_ptr<SessionEntry> require(const std::string& id) {
    auto entry = find(id);
    if (!entry) fail(404, "NotFound", "unknown session " + id);
    return entry;
  }

  static void sendJson(httplib::Response& res, const Json& body, int status = 200) {
    res.status = status;
    res.set_content(body.dump(2), "application/json");
  }

  static void sendText(httplib::Response& res, const std::string& body, int status = 200) {
    res.status = status;
    res.set_content(body, "application/json");
  }

  // Runs a handler, mapping library and HTTP errors to JSON error bodies.
  static httplib::Server::Handler guarded(std::function<void(const httplib::Request&, httplib::Response&)> f) {
    return [f = std::move(f)](const httplib::Request& req, httplib::Response& res) {
      try {
        f(req, res);
      } catch (const HttpError& e) {
        sendJson(res, {{"error", e.code}, {"message", e.message}}, e.status);
      } catch (const Error& e) {
        sendJson(res, {{"error", std::string(toString(e.code()))}, {"message", e.what()}}, statusFor(e.code()));
      } catch (const std::exception& e) {
        sendJson(res, {{"error", "Internal"}, {"message", e.what()}}, 500);
      }
    };
  }

  static Json parseBody(const httplib::Request& req) {
    try {
      return Json::parse(req.body);
    } catch (const Json::parse_error& e) {
      fail(400, "ParseError", e.what());
    }
  }

  void routes() {
    server.Get("/sessions", guarded([this](const httplib::Request&, httplib::Response& res) { listSessions(res); }));
    server.Get(std::string("/sessions/") + kId, guarded([this](const httplib::Request& req, httplib::Response& res) {
                 const auto s = require(req.matches[1])->snapshot();
                 res.set_header(kVersionHeader, std::to_string(s->version()));
                 sendText(res, sessionToJson(*s));
               }));
    server.Post(std::string("/sessions/") + kId, guarded([this](const httplib::Request& req, httplib::Response& res) {
                  createSession(req.matches[1], req.body, res);
                }));
    server.Get(std::string("/sessions/") + kId + "/frames/([0-9]+)/overlay",
               guarded([this](const httplib::Request& req, httplib::Response& res) {
                 overlay(req.matches[1], req.matches[2], res);
               }));
    server.Get(std::string("/sessions/") + kId + "/annotations",
               guarded([this](const httplib::Request& req, httplib::Response& res) {
                 const auto s = require(req.matches[1])->snapshot();
                 res.set_header(kVersionHeader, std::to_string(s->version()));
                 sendText(res, annotationsToJson(s->annotations, s->version()));
               }));
    server.Post(std::string("/sessions/") + kId + "/annotations",
                guarded([this](const httplib::Request& req, httplib::Response& res) { annotate(req, res); }));
    server.Post(std::string("/sessions/") + kId + "/solve",
                guarded([this](const httplib::Request& req, httplib::Response& res) { solve(req, res); }));
    server.Get(std::string("/sessions/") + kId + "/results",
               guarded([this](const httplib::Request& req, httplib::Response& res) { results(req.matches[1], res); }));
    server.Get("/jobs/([A-Za-z0-9_-]+)", guarded([this](const httplib::Request& req, httplib::Response& res) {
                 std::lock_guard lock(jobsLock);
                 auto it = jobs.find(req.matches[1]);
                 if (it == jobs.end()) fail(404, "NotFound", "unknown job " + std::string(req.matches[1]));
                 sendJson(res, jobJson(it->second));
               }));
    server.Get("/skeleton", guarded([](const httplib::Request&, httplib::Response& res) {
                 sendText(res, skeletonToJson(SkeletonModel::defaultHumanoid()));
               }));
  }

  void listSessions(httplib::Response& res) {
    Json list = Json::array();
    std::vector<std::string> ids;
    if (std::filesystem::is_directory(options.dataDir)) {
      for (const auto& d : std::filesystem::directory_iterator(options.dataDir)) {
        const std::string id = d.path().filename().string();
        if (d.is_directory() && std::regex_match(id, std::regex(kId)) && std::filesystem::exists(sessionFile(id))) {
          ids.push_back(id);
        }
      }
    }
    std::sort(ids.begin(), ids.end());
    for (const std::string& id : ids) {
      Json item = {{"id", id}};
      try {
        const auto s = find(id)->snapshot();
        item["version"] = s->version();
        item["frames"] = s->frameCount();
        item["static"] = s->annotations.staticObject;
      } catch (const HttpError& e) {
        item["error"] = e.message;
      }
      list.push_back(item);
    }
    sendJson(res, {{"sessions", list}});
  }

  void createSession(const std::string& id, const std::string& body, httplib::Response& res) {
    std::lock_guard lock(sessionsLock);
    if (sessions.count(id) || std::filesystem::exists(sessionFile(id))) {
      fail(409, "Conflict", "session " + id + " already exists");
    }
    const auto dir = options.dataDir / id;
    std::filesystem::create_directories(dir);
    SceneSession s;
    try {
      s = sessionFromJson(body, dir);
    } catch (const Error& e) {
      std::error_code ec;
      if (std::filesystem::is_empty(dir, ec)) std::filesystem::remove(dir, ec);
      throw;
    }
    saveSession(s, sessionFile(id));
    auto entry = std::make_shared<SessionEntry>();
    entry->dir = dir;
    entry->current = std::make_shared<const SceneSession>(std::move(s));
    sessions[id] = entry;
    res.set_header(kVersionHeader, std::to_string(entry->current->version()));
    sendText(res, sessionToJson(*entry->current), 201);
  }

  void annotate(const httplib::Request& req, httplib::Response& res) {
    const auto entry = require(req.matches[1]);
    if (!req.has_header(kVersionHeader)) fail(400, "MissingVersion", std::string(kVersionHeader) + " header is required");
    int expected = 0;
    try {
      expected = std::stoi(req.get_header_value(kVersionHeader));
    } catch (const std::exception&) {
      fail(400, "InvalidVersion", std::string(kVersionHeader) + " must be an integer");
    }
    const Json body = parseBody(req);
    std::vector<AnnotationEvent> events;
    const bool batch = body.is_object() && body.contains("events");
    if (batch && !body["events"].is_array()) fail(400, "InvalidArgument", "events must be an array");
    for (const Json& e : batch ? body["events"] : Json::array({body})) events.push_back(eventFromJson(e.dump()));

    std::lock_guard lock(entry->writer);
    const auto base = entry->snapshot();
    if (expected != base->version()) {
      res.set_header(kVersionHeader, std::to_string(base->version()));
      fail(409, "VersionConflict",
           "session is at version " + std::to_string(base->version()) + ", request was based on " +
               std::to_string(expected));
    }
    auto next = std::make_shared<SceneSession>(*base);
    for (const AnnotationEvent& e : events) next->addEvent(e);
    saveSession(*next, entry->dir / "session.json");
    entry->commit(next);
    res.set_header(kVersionHeader, std::to_string(next->version()));
    sendText(res, annotationsToJson(next->annotations, next->version()));
  }

  void solve(const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1];
    const auto entry = require(id);
    const auto s = entry->snapshot();
    if (!hasAnnotations(s->annotations)) fail(422, "UnderConstrained", "session has no annotated correspondences");
    const PipelineConfig config = req.body.empty() ? options.config : configFromJson(req.body);
    if (config.smooth && !(config.cutoffHz < 0.5 * s->fps)) {
      fail(422, "InvalidArgument", "cutoff_hz must be below half the session fps");
    }
    Job job;
    {
      std::lock_guard lock(jobsLock);
      job.id = "job-" + std::to_string(nextJob++);
      job.session = id;
      job.sessionVersion = s->version();
      jobs[job.id] = job;
    }
    enqueue([this, entry, s, config, jobId = job.id] {
      setStatus(jobId, "running", "");
      try {
        const PipelineResult r = runPipeline(*s, config);
        std::lock_guard lock(entry->results);
        writeResults(*s, r, entry->dir / "results");
        setStatus(jobId, "succeeded", "");
      } catch (const std::exception& e) {
        setStatus(jobId, "failed", e.what());
      }
    });
    res.set_header("Location", "/jobs/" + job.id);
    sendJson(res, jobJson(job), 202);
  }

  void setStatus(const std::string& id, const std::string& status, const std::string& error) {
    std::lock_guard lock(jobsLock);
    jobs[id].status = status;
    jobs[id].error = error;
  }

  void results(const std::string& id, httplib::Response& res) {
    const auto entry = require(id);
    std::lock_guard lock(entry->results);
    const auto dir = entry->dir / "results";
    if (!std::filesystem::exists(dir / "motion.json") || !std::filesystem::exists(dir / "report.json")) {
      fail(404, "NotFound", "session " + id + " has no results");
    }
    sendText(res, "{\"motion\": " + readFile(dir / "motion.json") + ", \"report\": " + readFile(dir / "report.json") + "}");
  }

  void overlay(const std::string& id, const std::string& frameText, httplib::Response& res) {
    const auto entry = require(id);
    const auto s = entry->snapshot();
    const long frame = frameText.size() > 9 ? -1 : std::stol(frameText);
    if (frame < 0 || frame >= s->frameCount()) fail(404, "NotFound", "no frame " + frameText);
    const int t = static_cast<int>(frame);

    std::optional<FrameState> solved;
    {
      std::lock_guard lock(entry->results);
      const auto motion = entry->dir / "results" / "motion.json";
      if (std::filesystem::exists(motion)) {
        const MotionSequence m = loadMotion(motion);
        if (static_cast<int>(m.frames.size()) == s->frameCount()) solved = m.frames[t];
      }
    }
    const CameraModel& cam = s->camera;
    RgbImage background(cam.width, cam.height, 64);
    if (s->framesDir) {
      const auto file = s->resolve(*s->framesDir) / frameFile(t);
      if (std::filesystem::exists(file)) {
        RgbImage img = loadRgbPng(file);
        if (img.width == cam.width && img.height == cam.height) background = std::move(img);
      }
    }
    const SkeletonPose& human = solved ? solved->human : s->humanPoses[t];
    const MaskImage h = rasterizeSilhouette(humanProxyMesh(capsules(s->skeleton, forwardKinematics(s->skeleton, human))),
                                            RigidPose(), cam);
    const MaskImage o = solved ? rasterizeSilhouette(s->mesh, solved->object, cam) : MaskImage(cam.width, cam.height);
    const std::vector<std::uint8_t> png = encodePng(overlayMasks(background, h, o));
    res.set_content(std::string(png.begin(), png.end()), "image/png");
  }
};

SessionService::SessionService(ServiceOptions options) : impl_(std::make_unique<Impl>(std::move(options))) {}

SessionService::~SessionService() {
  stop();
}

int SessionService::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

void SessionService::run() {
  impl_->server.listen_after_bind();
}

void SessionService::stop() {
  impl_->server.stop();
}

void SessionService::waitForJobs() {
  std::unique_lock lock(impl_->queueLock);
  impl_->queueIdle.wait(lock, [&] { return impl_->queue.empty() && impl_->running == 0; });
}

}  // namespace hoi
