#include <doctest.h>

#include <algorithm>
#include <mutex>
#include <optional>
#include <random>
#include <set>
#include <vector>

#include "taskrt/task.hpp"
#include "taskrt/task_graph.hpp"

using namespace taskrt;

namespace {

const Token A = token_from(10), B = token_from(11), C = token_from(12);

// Children of a private root, driven by hand through the graph.
struct Harness {
  TaskRef root = TaskRef::adopt(TaskDescriptor::create_root());
  std::vector<TaskRef> tasks;
  std::uint64_t next = 1;

  TaskDescriptor& add(std::vector<DependenceClause> cs) {
    TaskDescriptor* t = TaskDescriptor::create(next++, [] {}, std::move(cs), root.get());
    tasks.push_back(TaskRef::adopt(t));
    transition(*t, TaskEvent::Submit);
    return *t;
  }
  SubmitResult submit(TaskDescriptor& t) {
    std::lock_guard g(graph());
    return graph().submit(t);
  }
  std::vector<TaskDescriptor*> finish(TaskDescriptor& t) {
    transition(t, TaskEvent::Start);
    transition(t, TaskEvent::Finish);
    std::lock_guard g(graph());
    return graph().release(t);
  }
  TaskGraph& graph() { return root->children_graph(); }
};

// Independent model: two clause lists conflict if they share a token and
// at least one side writes it.
bool conflicts(const std::vector<DependenceClause>& x, const std::vector<DependenceClause>& y) {
  for (auto& a : x)
    for (auto& b : y)
      if (a.token == b.token && (writes(a.direction) || writes(b.direction))) return true;
  return false;
}

// Number of distinct immediate predecessors when every earlier task is
// still in the graph: last writer for a read; last writer plus readers
// since it for a write.
std::size_t expected_preds(const std::vector<std::vector<DependenceClause>>& sets, std::size_t j) {
  std::set<std::size_t> preds;
  for (auto& c : sets[j]) {
    std::optional<std::size_t> writer;
    std::vector<std::size_t> readers;
    for (std::size_t i = 0; i < j; ++i) {
      for (auto& d : sets[i]) {
        if (d.token != c.token) continue;
        if (writes(d.direction)) {
          writer = i;
          readers.clear();
        } else {
          readers.push_back(i);
        }
      }
    }
    if (writer) preds.insert(*writer);
    if (writes(c.direction)) preds.insert(readers.begin(), readers.end());
  }
  return preds.size();
}

std::vector<std::vector<DependenceClause>> random_sets(std::mt19937& rng, std::size_t n,
                                                       std::size_t tokens) {
  std::vector<std::vector<DependenceClause>> sets(n);
  for (auto& s : sets) {
    const int k = std::uniform_int_distribution<int>(0, 3)(rng);
    for (int i = 0; i < k; ++i) {
      s.push_back({token_from(100 + rng() % tokens), static_cast<Direction>(rng() % 3)});
    }
    s = merge_clauses(s);
  }
  return sets;
}

}  // namespace

TEST_SUITE("dep-graph") {

TEST_CASE("conflict rule") {
  CHECK_FALSE(conflict(in(A), in(A)));
  CHECK(conflict(in(A), out(A)));
  CHECK(conflict(out(A), in(A)));
  CHECK(conflict(inout(A), inout(A)));
  CHECK_FALSE(conflict(out(A), out(B)));
}

TEST_CASE("submit on empty graph is ready") {
  Harness h;
  auto r = h.submit(h.add({out(A)}));
  CHECK(r.ready);
  CHECK(r.pending == 0);
  CHECK(h.graph().in_graph_count() == 1);
}

TEST_CASE("writer then readers then writer") {
  Harness h;
  auto& w1 = h.add({out(A)});
  auto& r1 = h.add({in(A)});
  auto& r2 = h.add({in(A)});
  auto& w2 = h.add({inout(A)});
  CHECK(h.submit(w1).ready);
  CHECK(h.submit(r1).pending == 1);
  CHECK(h.submit(r2).pending == 1);
  CHECK(h.submit(w2).pending == 3);  // w1, r1, r2
  CHECK(r1.state() == TaskState::InGraph);

  auto ready = h.finish(w1);
  CHECK(ready.size() == 2);
  CHECK(w2.pending_predecessors() == 2);
  CHECK(h.finish(r1).empty());
  ready = h.finish(r2);
  REQUIRE(ready.size() == 1);
  CHECK(ready[0] == &w2);
  CHECK(w2.state() == TaskState::Ready);
  h.finish(w2);
  CHECK(h.graph().token_count() == 0);
  CHECK(h.graph().in_graph_count() == 0);
}

TEST_CASE("duplicate edge counted once") {
  Harness h;
  auto& w = h.add({out(A), out(B)});
  auto& r = h.add({in(A), inout(B)});
  h.submit(w);
  CHECK(h.submit(r).pending == 1);
  CHECK(h.finish(w).size() == 1);
}

TEST_CASE("released tasks are purged from token entries") {
  Harness h;
  auto& r1 = h.add({in(A)});
  auto& r2 = h.add({in(A), in(C)});
  h.submit(r1);
  h.submit(r2);
  REQUIRE(h.graph().find(A) != nullptr);
  CHECK(h.graph().find(A)->readers_since_write.size() == 2);
  h.finish(r1);
  CHECK(h.graph().find(A)->readers_since_write.size() == 1);
  h.finish(r2);
  CHECK(h.graph().find(A) == nullptr);
  CHECK(h.graph().find(C) == nullptr);

  // A later writer must not wait for anything.
  CHECK(h.submit(h.add({out(A)})).ready);
}

TEST_CASE("disjoint tokens never create edges") {
  Harness h;
  for (int i = 0; i < 50; ++i) CHECK(h.submit(h.add({inout(token_from(1000 + i))})).ready);
}

TEST_CASE("oracle: predecessor counts match the last-writer model") {
  std::mt19937 rng(7);
  for (int round = 0; round < 200; ++round) {
    Harness h;
    auto sets = random_sets(rng, 30, 5);
    for (std::size_t j = 0; j < sets.size(); ++j) {
      auto& t = h.add(sets[j]);
      CAPTURE(j);
      CHECK(h.submit(t).pending == expected_preds(sets, j));
    }
  }
}

TEST_CASE("oracle: ready exactly when every earlier conflicting task is released") {
  std::mt19937 rng(11);
  for (int round = 0; round < 300; ++round) {
    Harness h;
    const std::size_t n = 25;
    auto sets = random_sets(rng, n, 4);
    std::vector<TaskDescriptor*> ts;
    std::vector<bool> released(n, false);
    std::vector<std::size_t> ready;
    std::size_t submitted = 0;
    auto index_of = [&](TaskDescriptor* t) {
      return static_cast<std::size_t>(std::find(ts.begin(), ts.end(), t) - ts.begin());
    };
    while (std::count(released.begin(), released.end(), true) < static_cast<long>(n)) {
      const bool do_submit = submitted < n && (ready.empty() || rng() % 2 == 0);
      if (do_submit) {
        ts.push_back(&h.add(sets[submitted]));
        if (h.submit(*ts.back()).ready) ready.push_back(submitted);
        ++submitted;
      } else {
        REQUIRE_FALSE(ready.empty());
        const std::size_t pick = rng() % ready.size();
        const std::size_t j = ready[pick];
        ready.erase(ready.begin() + static_cast<long>(pick));
        for (TaskDescriptor* s : h.finish(*ts[j])) ready.push_back(index_of(s));
        released[j] = true;
      }
      for (std::size_t j = 0; j < submitted; ++j) {
        if (released[j]) continue;
        bool blocked = false;
        for (std::size_t i = 0; i < j; ++i) blocked |= !released[i] && conflicts(sets[i], sets[j]);
        const bool is_ready = std::find(ready.begin(), ready.end(), j) != ready.end();
        CAPTURE(j);
        CHECK(is_ready == !blocked);
        CHECK((ts[j]->pending_predecessors() > 0) == (ts[j]->state() == TaskState::InGraph));
      }
    }
    CHECK(h.graph().token_count() == 0);
    CHECK(h.graph().in_graph_count() == 0);
  }
}

}  // TEST_SUITE
