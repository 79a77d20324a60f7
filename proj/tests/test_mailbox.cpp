#include <doctest.h>

#include <atomic>
#include <thread>
#include <vector>

#include "taskrt/mailbox.hpp"

using namespace taskrt;

namespace {

TaskDescriptor* fake(std::uintptr_t i) { return reinterpret_cast<TaskDescriptor*>(i * 8); }

}  // namespace

TEST_SUITE("mailbox") {

TEST_CASE("submit queue is FIFO") {
  Mailbox box;
  for (std::uint64_t s = 1; s <= 3; ++s) box.post_submit({fake(s), s});
  auto lease = box.lease_submit_queue();
  REQUIRE(lease);
  for (std::uint64_t s = 1; s <= 3; ++s) {
    auto m = box.pop_submit(lease);
    REQUIRE(m);
    CHECK(m->creation_seq == s);
  }
  CHECK_FALSE(box.pop_submit(lease));
}

TEST_CASE("lease is exclusive and released on destruction") {
  Mailbox box;
  {
    auto first = box.lease_submit_queue();
    REQUIRE(first);
    CHECK(box.leased());
    CHECK_FALSE(box.lease_submit_queue());
    SubmitLease moved = std::move(first);
    CHECK_FALSE(first);
    CHECK(moved);
    CHECK_FALSE(box.lease_submit_queue());
  }
  CHECK_FALSE(box.leased());
  CHECK(box.lease_submit_queue());
}

TEST_CASE("empty mailbox") {
  Mailbox box;
  CHECK(box.empty());
  CHECK_FALSE(box.pop_done());
  box.post_done({fake(1)});
  CHECK(box.has_done());
  CHECK_FALSE(box.has_submit());
  CHECK(box.pop_done()->task == fake(1));
  CHECK(box.empty());
}

TEST_CASE("concurrent producer and leaseholders keep submit order") {
  // One producer, several would-be consumers racing for the lease. Every
  // message is consumed once and consumption order equals posting order.
  Mailbox box;
  constexpr std::uint64_t N = 200000;
  std::atomic<bool> producing{true};
  std::vector<std::uint64_t> seen;
  seen.reserve(N);
  std::atomic<int> holders{0};
  std::atomic<bool> overlap{false};

  std::thread producer([&] {
    for (std::uint64_t s = 1; s <= N; ++s) box.post_submit({fake(s), s});
    producing = false;
  });
  std::vector<std::thread> consumers;
  for (int c = 0; c < 3; ++c) {
    consumers.emplace_back([&] {
      while (producing || box.has_submit()) {
        auto lease = box.lease_submit_queue();
        if (!lease) continue;
        if (holders.fetch_add(1) != 0) overlap = true;
        for (int k = 0; k < 8; ++k) {
          auto m = box.pop_submit(lease);
          if (!m) break;
          seen.push_back(m->creation_seq);
        }
        holders.fetch_sub(1);
      }
    });
  }
  producer.join();
  for (auto& t : consumers) t.join();
  CHECK_FALSE(overlap.load());
  REQUIRE(seen.size() == N);
  bool ordered = true;
  for (std::uint64_t i = 0; i < N; ++i) ordered &= seen[i] == i + 1;
  CHECK(ordered);
  auto tot = box.totals();
  CHECK(tot.posted_submit == N);
  CHECK(tot.consumed_submit == N);
}

TEST_CASE("done messages are consumed exactly once by many consumers") {
  Mailbox box;
  constexpr std::uintptr_t N = 100000;
  std::vector<std::atomic<int>> hits(N + 1);
  std::atomic<bool> producing{true};
  std::thread producer([&] {
    for (std::uintptr_t i = 1; i <= N; ++i) box.post_done({fake(i)});
    producing = false;
  });
  std::vector<std::thread> consumers;
  for (int c = 0; c < 4; ++c) {
    consumers.emplace_back([&] {
      while (producing || box.has_done()) {
        if (auto m = box.pop_done()) hits[reinterpret_cast<std::uintptr_t>(m->task) / 8].fetch_add(1);
      }
    });
  }
  producer.join();
  for (auto& t : consumers) t.join();
  bool once = true;
  for (std::uintptr_t i = 1; i <= N; ++i) once &= hits[i].load() == 1;
  CHECK(once);
  CHECK(box.totals().consumed_done == N);
}

}  // TEST_SUITE
