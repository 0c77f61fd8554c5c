#include <gtest/gtest.h>

#include <chrono>
#include <fstream>
#include <json.hpp>
#include <thread>

#include "service/service.h"
#include "synthetic_scene.h"

// After the Eigen-based headers: <resolv.h> defines a _res macro.
#include <httplib.h>

using namespace hoi;
namespace ht = hoi::testing;
using Json = nlohmann::json;

namespace {

class ServiceTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    data_ = std::filesystem::temp_directory_path() / "hoi_service_data";
    std::filesystem::remove_all(data_);
    ht::SceneOptions o;
    o.frames = 8;
    o.masks = false;
    ht::writeScene(data_ / "carry", o);
    ht::writeScene(data_ / "other", o);

    // A session without annotations.
    ht::writeScene(data_ / "blank", o);
    std::string text;
    {
      std::ifstream in(data_ / "blank" / "session.json");
      text.assign(std::istreambuf_iterator<char>(in), {});
    }
    Json doc = Json::parse(text);
    doc["annotations"] = {{"pairs", Json::array()}, {"tracks", Json::array()}, {"events", Json::array()}};
    std::ofstream(data_ / "blank" / "session.json") << doc.dump();
  }

  void SetUp() override {
    ServiceOptions options;
    options.dataDir = data_;
    options.config.refine.iterations = 2;
    service_ = std::make_unique<SessionService>(options);
    port_ = service_->bind("127.0.0.1", 0);
    ASSERT_GT(port_, 0);
    thread_ = std::thread([this] { service_->run(); });
    client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
    client_->set_read_timeout(30, 0);
    for (int i = 0; i < 100 && !client_->Get("/skeleton"); ++i) std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }

  void TearDown() override {
    service_->waitForJobs();
    service_->stop();
    thread_.join();
    service_.reset();
  }

  int version(const std::string& id) {
    auto r = client_->Get("/sessions/" + id + "/annotations");
    return std::stoi(r->get_header_value("X-Session-Version"));
  }

  httplib::Result postEvent(const std::string& id, const Json& event, int v) {
    return client_->Post("/sessions/" + id + "/annotations", {{"X-Session-Version", std::to_string(v)}}, event.dump(),
                         "application/json");
  }

  static Json pairEvent(int keypoint, double x) {
    return {{"kind", "add-pair"},
            {"frame", 0},
            {"timestamp", 0},
            {"payload", {{"keypoint", keypoint}, {"object_point", {x, 0.0, 0.0}}, {"start", 0}, {"end", 3}}}};
  }

  static inline std::filesystem::path data_;
  std::unique_ptr<SessionService> service_;
  std::unique_ptr<httplib::Client> client_;
  std::thread thread_;
  int port_ = 0;
};

}  // namespace

TEST_F(ServiceTest, ListsSessions) {
  auto r = client_->Get("/sessions");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 200);
  const Json body = Json::parse(r->body);
  std::vector<std::string> ids;
  for (const Json& s : body["sessions"]) ids.push_back(s["id"]);
  EXPECT_EQ(ids, (std::vector<std::string>{"blank", "carry", "other"}));
}

TEST_F(ServiceTest, UnknownSessionAndFrameAre404) {
  EXPECT_EQ(client_->Get("/sessions/missing")->status, 404);
  EXPECT_EQ(client_->Get("/sessions/missing/annotations")->status, 404);
  EXPECT_EQ(client_->Get("/sessions/carry/frames/8/overlay")->status, 404);
  EXPECT_EQ(client_->Get("/jobs/job-999")->status, 404);
}

TEST_F(ServiceTest, GetSessionServesTheStoredDocument) {
  auto r = client_->Get("/sessions/carry");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 200);
  EXPECT_TRUE(r->has_header("X-Session-Version"));
  EXPECT_EQ(Json::parse(r->body)["version"], 1);
}

TEST_F(ServiceTest, PostedPairIsReadBack) {
  const int v = version("other");
  auto post = postEvent("other", pairEvent(2, 0.125), v);
  ASSERT_TRUE(post);
  ASSERT_EQ(post->status, 200) << post->body;
  EXPECT_EQ(post->get_header_value("X-Session-Version"), std::to_string(v + 1));

  auto get = client_->Get("/sessions/other/annotations");
  const Json body = Json::parse(get->body);
  EXPECT_EQ(body["version"], v + 1);
  const Json& last = body["pairs"].back();
  EXPECT_EQ(last["keypoint"], 2);
  EXPECT_EQ(last["object_point"][0], 0.125);

  // The write is persisted.
  const SceneSession stored = loadSession(data_ / "other" / "session.json");
  EXPECT_EQ(stored.version(), v + 1);
  EXPECT_EQ(stored.annotations.pairs.back().objectPoint.x(), 0.125);
}

TEST_F(ServiceTest, StaleVersionIsConflict) {
  const int v = version("other");
  ASSERT_EQ(postEvent("other", pairEvent(3, 0.5), v)->status, 200);
  auto stale = postEvent("other", pairEvent(4, 0.5), v);
  EXPECT_EQ(stale->status, 409);
  EXPECT_EQ(stale->get_header_value("X-Session-Version"), std::to_string(v + 1));
  EXPECT_EQ(version("other"), v + 1);
}

TEST_F(ServiceTest, InvalidPayloadsAre400) {
  const int v = version("other");
  EXPECT_EQ(postEvent("other", Json{{"kind", "add-pair"}}, v)->status, 400);
  EXPECT_EQ(postEvent("other", pairEvent(100000, 0.0), v)->status, 400);
  auto noHeader = client_->Post("/sessions/other/annotations", pairEvent(1, 0.0).dump(), "application/json");
  EXPECT_EQ(noHeader->status, 400);
  auto garbage = client_->Post("/sessions/other/annotations", {{"X-Session-Version", std::to_string(v)}}, "{nope",
                               "application/json");
  EXPECT_EQ(garbage->status, 400);
  EXPECT_EQ(version("other"), v);
}

TEST_F(ServiceTest, BatchesApplyAtomically) {
  const int v = version("other");
  const Json bad = {{"events", {pairEvent(1, 0.0), pairEvent(100000, 0.0)}}};
  EXPECT_EQ(postEvent("other", bad, v)->status, 400);
  EXPECT_EQ(version("other"), v);
  const Json good = {{"events", {pairEvent(1, 0.0), pairEvent(5, 0.0)}}};
  EXPECT_EQ(postEvent("other", good, v)->status, 200);
  EXPECT_EQ(version("other"), v + 2);
}

TEST_F(ServiceTest, SolveWithoutAnnotationsIs422) {
  auto r = client_->Post("/sessions/blank/solve", "", "application/json");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 422);
}

TEST_F(ServiceTest, SolveRunsAJobToCompletion) {
  auto r = client_->Post("/sessions/carry/solve", "", "application/json");
  ASSERT_TRUE(r);
  ASSERT_EQ(r->status, 202) << r->body;
  const std::string job = Json::parse(r->body)["id"];
  Json state;
  for (int i = 0; i < 600; ++i) {
    state = Json::parse(client_->Get("/jobs/" + job)->body);
    if (state["status"] == "succeeded" || state["status"] == "failed") break;
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
  ASSERT_EQ(state["status"], "succeeded") << state.dump();
  auto results = client_->Get(state["result"].get<std::string>());
  ASSERT_EQ(results->status, 200);
  const Json body = Json::parse(results->body);
  EXPECT_EQ(body["motion"]["frames"].size(), 8u);
  EXPECT_TRUE(body["report"].contains("keyframes"));

  auto overlay = client_->Get("/sessions/carry/frames/3/overlay");
  ASSERT_EQ(overlay->status, 200);
  EXPECT_EQ(overlay->get_header_value("Content-Type"), "image/png");
  EXPECT_EQ(overlay->body.substr(1, 3), "PNG");
}

TEST_F(ServiceTest, InvalidSolveConfigIs400) {
  auto r = client_->Post("/sessions/carry/solve", R"({"keyframe_stride": 0})", "application/json");
  EXPECT_EQ(r->status, 400);
}

TEST_F(ServiceTest, ConcurrentWritersOnDifferentSessionsAreIsolated) {
  const int a = version("carry");
  const int b = version("other");
  std::vector<std::thread> threads;
  std::vector<int> status(2);
  threads.emplace_back([&] {
    httplib::Client c("127.0.0.1", port_);
    status[0] = c.Post("/sessions/carry/annotations", {{"X-Session-Version", std::to_string(a)}},
                       pairEvent(1, 0.25).dump(), "application/json")
                    ->status;
  });
  threads.emplace_back([&] {
    httplib::Client c("127.0.0.1", port_);
    status[1] = c.Post("/sessions/other/annotations", {{"X-Session-Version", std::to_string(b)}},
                       pairEvent(1, 0.75).dump(), "application/json")
                    ->status;
  });
  for (std::thread& t : threads) t.join();
  EXPECT_EQ(status, (std::vector<int>{200, 200}));
  EXPECT_EQ(version("carry"), a + 1);
  EXPECT_EQ(version("other"), b + 1);
}

TEST_F(ServiceTest, RacingWritersOnOneSessionGetOneWinner) {
  const int v = version("other");
  std::vector<int> status(4);
  std::vector<std::thread> threads;
  for (int i = 0; i < 4; ++i) {
    threads.emplace_back([&, i] {
      httplib::Client c("127.0.0.1", port_);
      status[i] = c.Post("/sessions/other/annotations", {{"X-Session-Version", std::to_string(v)}},
                         pairEvent(1, 0.1 * i).dump(), "application/json")
                      ->status;
    });
  }
  for (std::thread& t : threads) t.join();
  EXPECT_EQ(std::count(status.begin(), status.end(), 200), 1);
  EXPECT_EQ(std::count(status.begin(), status.end(), 409), 3);
  EXPECT_EQ(version("other"), v + 1);
}

TEST_F(ServiceTest, CreateSessionFromDocument) {
  std::filesystem::remove_all(data_ / "fresh");
  std::filesystem::create_directories(data_ / "fresh");
  for (const char* f : {"box.obj", "human_poses.json"}) {
    std::filesystem::copy_file(data_ / "carry" / f, data_ / "fresh" / f);
  }
  const std::string doc = client_->Get("/sessions/carry")->body;
  auto created = client_->Post("/sessions/fresh", doc, "application/json");
  ASSERT_EQ(created->status, 201) << created->body;
  EXPECT_EQ(client_->Post("/sessions/fresh", doc, "application/json")->status, 409);
  EXPECT_EQ(client_->Post("/sessions/broken", "{\"version\": 7}", "application/json")->status, 400);
  EXPECT_EQ(client_->Get("/sessions/fresh")->status, 200);
}

TEST_F(ServiceTest, SkeletonEndpointListsKeypoints) {
  auto r = client_->Get("/skeleton");
  ASSERT_EQ(r->status, 200);
  const Json body = Json::parse(r->body);
  EXPECT_EQ(body["joints"].size(), 24u);
  EXPECT_FALSE(body["keypoints"].empty());
}
