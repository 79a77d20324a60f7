#include <doctest.h>

#include <atomic>
#include <thread>
#include <vector>

#include "taskrt/task.hpp"

using namespace taskrt;

namespace {

const Token a = token_from(1), b = token_from(2);

TaskDescriptor* fresh(TaskDescriptor* parent = nullptr) {
  return TaskDescriptor::create(7, [] {}, {}, parent);
}

// Drives a task from CREATED along the given events.
void drive(TaskDescriptor& t, std::initializer_list<TaskEvent> events) {
  for (TaskEvent e : events) transition(t, e);
}

}  // namespace

TEST_SUITE("task-model") {

TEST_CASE("merge_clauses joins duplicates") {
  CHECK(merge_clauses({in(a), out(a)}) == std::vector{inout(a)});
  CHECK(merge_clauses({in(a), in(b)}) == std::vector{in(a), in(b)});
  CHECK(merge_clauses({inout(a), in(a), out(b)}) == std::vector{inout(a), out(b)});
  CHECK(merge_clauses({out(a), out(a)}) == std::vector{out(a)});
  CHECK(merge_clauses({in(b), in(a), in(b)}) == std::vector{in(b), in(a)});
  CHECK(merge_clauses({}).empty());
}

TEST_CASE("merge_clauses property: one clause per token, join of all occurrences") {
  std::uint64_t x = 99;
  for (int round = 0; round < 500; ++round) {
    std::vector<DependenceClause> cs;
    const int n = static_cast<int>(x % 12);
    for (int i = 0; i < n; ++i) {
      x = x * 6364136223846793005ull + 1442695040888963407ull;
      cs.push_back({token_from((x >> 33) % 4), static_cast<Direction>((x >> 40) % 3)});
    }
    auto merged = merge_clauses(cs);
    for (std::size_t i = 0; i < merged.size(); ++i) {
      for (std::size_t j = i + 1; j < merged.size(); ++j) CHECK(merged[i].token != merged[j].token);
      bool any_in = false, any_out = false, any_inout = false;
      for (auto& c : cs) {
        if (c.token != merged[i].token) continue;
        any_in |= c.direction == Direction::In;
        any_out |= c.direction == Direction::Out;
        any_inout |= c.direction == Direction::InOut;
      }
      Direction expect = any_inout || (any_in && any_out) ? Direction::InOut
                         : any_out                        ? Direction::Out
                                                          : Direction::In;
      CHECK(merged[i].direction == expect);
    }
  }
}

TEST_CASE("descriptor merges clauses on creation") {
  TaskRef t = TaskRef::adopt(TaskDescriptor::create(1, {}, {in(a), out(a), in(b)}));
  CHECK(t->clauses() == std::vector{inout(a), in(b)});
  CHECK(t->state() == TaskState::Created);
}

TEST_CASE("legal transition table") {
  using S = TaskState;
  using E = TaskEvent;
  struct Edge {
    S from;
    E ev;
    S to;
  };
  const std::vector<Edge> legal = {
      {S::Created, E::Submit, S::Submitted},      {S::Submitted, E::EnterGraph, S::InGraph},
      {S::InGraph, E::BecomeReady, S::Ready},     {S::Ready, E::Start, S::Running},
      {S::Running, E::Block, S::Blocked},         {S::Blocked, E::Unblock, S::Running},
      {S::Running, E::Finish, S::Finished},       {S::Finished, E::Release, S::Released},
      {S::Released, E::LastChildGone, S::Deletable},
  };
  for (int f = 0; f <= static_cast<int>(S::Deletable); ++f) {
    for (int e = 0; e <= static_cast<int>(E::LastChildGone); ++e) {
      S to{};
      bool expect = false;
      S expect_to{};
      for (auto& edge : legal) {
        if (edge.from == S(f) && edge.ev == E(e)) {
          expect = true;
          expect_to = edge.to;
        }
      }
      CAPTURE(to_string(S(f)));
      CAPTURE(to_string(E(e)));
      CHECK(next_state(S(f), E(e), to) == expect);
      if (expect) CHECK(to == expect_to);
    }
  }
}

TEST_CASE("transition examples") {
  TaskRef t = TaskRef::adopt(fresh());
  CHECK(transition(*t, TaskEvent::Submit) == TaskState::Submitted);
  drive(*t, {TaskEvent::EnterGraph, TaskEvent::BecomeReady, TaskEvent::Start});
  CHECK(transition(*t, TaskEvent::Finish) == TaskState::Finished);

  TaskRef r = TaskRef::adopt(fresh());
  drive(*r, {TaskEvent::Submit, TaskEvent::EnterGraph, TaskEvent::BecomeReady});
  CHECK(r->state() == TaskState::Ready);
  try {
    transition(*r, TaskEvent::Finish);
    FAIL("expected IllegalTransition");
  } catch (const IllegalTransition& e) {
    CHECK(e.from() == TaskState::Ready);
    CHECK(e.event() == TaskEvent::Finish);
  }
  CHECK(r->state() == TaskState::Ready);
}

TEST_CASE("root starts running") {
  TaskRef root = TaskRef::adopt(TaskDescriptor::create_root());
  CHECK(root->state() == TaskState::Running);
  CHECK(root->parent() == nullptr);
}

TEST_CASE("try_delete requires RELEASED and no live children") {
  TaskDescriptor* p = fresh();
  TaskRef keep(p);
  drive(*p, {TaskEvent::Submit, TaskEvent::EnterGraph, TaskEvent::BecomeReady, TaskEvent::Start,
             TaskEvent::Finish});
  CHECK_FALSE(try_delete(*p));  // FINISHED
  transition(*p, TaskEvent::Release);

  attach_child(*p);
  CHECK(p->live_children() == 1);
  CHECK_FALSE(try_delete(*p));
  CHECK(p->state() == TaskState::Released);
  CHECK(detach_child(*p));
  CHECK(try_delete(*p));
  CHECK(p->state() == TaskState::Deletable);
  CHECK_FALSE(try_delete(*p));
}

TEST_CASE("try_delete has exactly one winner under contention") {
  for (int round = 0; round < 200; ++round) {
    TaskDescriptor* t = fresh();
    TaskRef keep(t);
    drive(*t, {TaskEvent::Submit, TaskEvent::EnterGraph, TaskEvent::BecomeReady, TaskEvent::Start,
               TaskEvent::Finish, TaskEvent::Release});
    std::atomic<int> wins{0};
    std::atomic<bool> go{false};
    std::vector<std::thread> ts;
    for (int i = 0; i < 4; ++i) {
      ts.emplace_back([&] {
        while (!go.load()) {
        }
        if (try_delete(*t)) wins.fetch_add(1);
      });
    }
    go = true;
    for (auto& th : ts) th.join();
    CHECK(wins.load() == 1);
  }
}

TEST_CASE("releaser and last child race: exactly one deletes the parent") {
  // One thread releases the parent, another detaches its last child; both
  // then try to delete, as the runtime does.
  for (int round = 0; round < 500; ++round) {
    TaskDescriptor* p = fresh();
    TaskRef keep(p);
    drive(*p, {TaskEvent::Submit, TaskEvent::EnterGraph, TaskEvent::BecomeReady, TaskEvent::Start,
               TaskEvent::Finish});
    attach_child(*p);
    std::atomic<int> wins{0};
    std::thread releaser([&] {
      transition(*p, TaskEvent::Release);
      if (try_delete(*p)) wins.fetch_add(1);
    });
    std::thread child([&] {
      if (detach_child(*p) && try_delete(*p)) wins.fetch_add(1);
    });
    releaser.join();
    child.join();
    CHECK(wins.load() == 1);
    CHECK(p->state() == TaskState::Deletable);
  }
}

TEST_CASE("child keeps parent alive") {
  TaskDescriptor* p = fresh();
  TaskRef child = TaskRef::adopt(TaskDescriptor::create(2, {}, {}, p));
  drive(*p, {TaskEvent::Submit, TaskEvent::EnterGraph, TaskEvent::BecomeReady, TaskEvent::Start,
             TaskEvent::Finish, TaskEvent::Release});
  CHECK(try_delete(*p));  // drops the life reference; the child's still holds
  CHECK(child->parent() == p);
  CHECK(p->state() == TaskState::Deletable);
}

}  // TEST_SUITE
