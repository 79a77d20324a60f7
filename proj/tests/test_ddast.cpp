#include <doctest.h>

#include <atomic>
#include <memory>
#include <mutex>
#include <thread>
#include <utility>
#include <vector>

#include "taskrt/ddast.hpp"
#include "taskrt/mailbox.hpp"

using namespace taskrt;

namespace {

TaskDescriptor* fake(std::uintptr_t box, std::uintptr_t k) {
  return reinterpret_cast<TaskDescriptor*>((box * 1000 + k) * 8);
}
std::uintptr_t box_of(TaskDescriptor* t) { return reinterpret_cast<std::uintptr_t>(t) / 8 / 1000; }

// Records every message; each processed submit adds one ready task.
struct FakeHost : ManagerHost {
  explicit FakeHost(std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) boxes.push_back(std::make_unique<Mailbox>());
  }
  std::size_t mailbox_count() const override { return boxes.size(); }
  Mailbox& mailbox(std::size_t w) override {
    ++visits;
    return *boxes[w];
  }
  std::size_t ready_count() const override { return ready; }
  void process_submit(const SubmitTaskMessage& m) override {
    std::lock_guard g(mu);
    log.emplace_back('S', box_of(m.task));
    ready += ready_per_submit;
    handled.fetch_add(1);
  }
  void process_done(const DoneTaskMessage& m) override {
    std::lock_guard g(mu);
    log.emplace_back('D', box_of(m.task));
    handled.fetch_add(1);
  }
  void on_manager_enter(std::size_t) override {
    const int now = inside.fetch_add(1) + 1;
    int seen = most_inside.load();
    while (now > seen && !most_inside.compare_exchange_weak(seen, now)) {
    }
    enters.fetch_add(1);
  }
  void on_manager_exit(std::size_t) override {
    inside.fetch_sub(1);
    exits.fetch_add(1);
  }

  void submits(std::size_t box, std::size_t count) {
    for (std::size_t k = 1; k <= count; ++k) boxes[box]->post_submit({fake(box, k), ++seq[box]});
  }
  void dones(std::size_t box, std::size_t count) {
    for (std::size_t k = 1; k <= count; ++k) boxes[box]->post_done({fake(box, 500 + k)});
  }

  std::vector<std::unique_ptr<Mailbox>> boxes;
  std::uint64_t seq[16] = {};
  std::mutex mu;
  std::vector<std::pair<char, std::uintptr_t>> log;
  std::atomic<std::size_t> ready{0}, handled{0};
  std::size_t ready_per_submit = 0;
  std::size_t visits = 0;
  std::atomic<int> inside{0}, most_inside{0}, enters{0}, exits{0};
};

DdastConfig cfg(std::size_t threads, std::size_t spins, std::size_t ops, std::size_t ready) {
  return {threads, spins, ops, ready};
}

}  // namespace

TEST_SUITE("ddast-manager") {

TEST_CASE("tuned defaults") {
  CHECK(default_config(1) == cfg(1, 1, 8, 4));
  CHECK(default_config(8) == cfg(1, 1, 8, 4));
  CHECK(default_config(9) == cfg(2, 1, 8, 4));
  CHECK(default_config(64) == cfg(8, 1, 8, 4));
  CHECK(default_config(68) == cfg(9, 1, 8, 4));
  CHECK_THROWS(default_config(0));
}

TEST_CASE("config validation") {
  CHECK_NOTHROW(cfg(1, 1, 1, 0).validate());
  CHECK_THROWS(cfg(0, 1, 8, 4).validate());
  CHECK_THROWS(cfg(1, 0, 8, 4).validate());
  CHECK_THROWS(cfg(1, 1, 0, 4).validate());
}

TEST_CASE("parameter names") {
  CHECK(parse_ddast_param("MAX_OPS_THREAD") == DdastParam::MaxOpsThread);
  CHECK(parse_ddast_param("max-ops-thread") == DdastParam::MaxOpsThread);
  CHECK(parse_ddast_param("min_ready_tasks") == DdastParam::MinReadyTasks);
  CHECK(parse_ddast_param("max-ddast-threads") == DdastParam::MaxDdastThreads);
  CHECK(parse_ddast_param("MAX_SPINS") == DdastParam::MaxSpins);
  CHECK_THROWS(parse_ddast_param("spins"));
  DdastConfig c = default_config(4);
  for (auto p : {DdastParam::MaxDdastThreads, DdastParam::MaxSpins, DdastParam::MaxOpsThread,
                 DdastParam::MinReadyTasks}) {
    set(c, p, 77);
    CHECK(get(c, p) == 77);
    CHECK(parse_ddast_param(to_string(p)) == p);
  }
}

TEST_CASE("gauge never admits more than the cap") {
  for (std::size_t cap : {1u, 2u, 3u}) {
    ManagerGauge g;
    std::atomic<std::size_t> inside{0}, worst{0};
    std::vector<std::thread> ts;
    for (int t = 0; t < 6; ++t) {
      ts.emplace_back([&] {
        for (int i = 0; i < 20000; ++i) {
          if (!g.try_enter(cap)) continue;
          const std::size_t now = inside.fetch_add(1) + 1;
          std::size_t w = worst.load();
          while (now > w && !worst.compare_exchange_weak(w, now)) {
          }
          inside.fetch_sub(1);
          g.leave();
        }
      });
    }
    for (auto& t : ts) t.join();
    CHECK(worst.load() <= cap);
    CHECK(g.high_water() <= cap);
    CHECK(g.active() == 0);
  }
}

TEST_CASE("min_ready_tasks = 0 handles one message per call") {
  FakeHost h(2);
  h.submits(0, 3);
  DdastManager m(cfg(1, 1, 8, 0), h);
  m.run(1);
  CHECK(h.log.size() == 1);
  m.run(1);
  m.run(1);
  CHECK(h.log.size() == 3);
  CHECK(m.messages_processed() == 3);
}

TEST_CASE("round robin from self + 1 in chunks of max_ops_thread") {
  FakeHost h(3);
  for (std::size_t b = 0; b < 3; ++b) h.submits(b, 5);
  DdastManager m(cfg(1, 1, 2, 1000), h);
  m.run(0);
  std::vector<std::uintptr_t> order;
  for (auto& [kind, box] : h.log) order.push_back(box);
  CHECK(order == std::vector<std::uintptr_t>{1, 1, 2, 2, 0, 0, 1, 1, 2, 2, 0, 0, 1, 2, 0});
}

TEST_CASE("submits before dones within a mailbox") {
  FakeHost h(1);
  h.dones(0, 3);
  h.submits(0, 3);
  DdastManager m(cfg(1, 1, 8, 1000), h);
  m.run(0);
  REQUIRE(h.log.size() == 6);
  for (int i = 0; i < 3; ++i) CHECK(h.log[i].first == 'S');
  for (int i = 3; i < 6; ++i) CHECK(h.log[i].first == 'D');
}

TEST_CASE("busy submit queue: only done messages are taken") {
  FakeHost h(1);
  h.submits(0, 2);
  h.dones(0, 2);
  auto held = h.boxes[0]->lease_submit_queue();
  DdastManager m(cfg(1, 1, 8, 1000), h);
  m.run(0);
  REQUIRE(h.log.size() == 2);
  CHECK(h.log[0].first == 'D');
  CHECK(h.log[1].first == 'D');
  CHECK(h.boxes[0]->has_submit());
}

TEST_CASE("leaves once enough tasks are ready") {
  FakeHost h(2);
  h.ready_per_submit = 1;
  h.submits(0, 10);
  h.submits(1, 10);
  DdastManager m(cfg(1, 1, 8, 3), h);
  m.run(0);
  CHECK(h.log.size() == 3);
}

TEST_CASE("max_spins empty sweeps then leave") {
  for (std::size_t spins : {1u, 4u}) {
    FakeHost h(3);
    DdastManager m(cfg(1, spins, 8, 4), h);
    m.run(2);
    CHECK(h.visits == 3 * spins);
    CHECK(h.enters == 1);
    CHECK(h.exits == 1);
  }
}

TEST_CASE("admission cap holds with concurrent callers") {
  for (std::size_t cap : {1u, 2u}) {
    FakeHost h(4);
    for (std::size_t b = 0; b < 4; ++b) h.dones(b, 2000);
    DdastManager m(cfg(cap, 4, 8, 1000000), h);
    std::vector<std::thread> ts;
    for (std::size_t t = 0; t < 4; ++t) {
      ts.emplace_back([&, t] {
        while (h.handled.load() < 8000) m.run(t);
      });
    }
    for (auto& th : ts) th.join();
    CHECK(h.most_inside.load() <= static_cast<int>(cap));
    CHECK(h.enters.load() == h.exits.load());
    CHECK(m.gauge().high_water() <= cap);
    CHECK(h.log.size() == 8000);
  }
}

}  // TEST_SUITE
