#pragma once

#include <atomic>
#include <cassert>
#include <cstdint>
#include <deque>
#include <mutex>
#include <optional>
#include <utility>

#include "taskrt/spinlock.hpp"

namespace taskrt {

class TaskDescriptor;

struct SubmitTaskMessage {
  TaskDescriptor* task = nullptr;
  std::uint64_t creation_seq = 0;
};

struct DoneTaskMessage {
  TaskDescriptor* task = nullptr;
};

// Unbounded FIFO for one producer and one consumer at a time. Values live
// in fixed-size segments linked through atomics, so the producer never waits
// on the consumer and allocates once per segment.
template <typename T>
class SpscQueue {
 public:
  SpscQueue() : head_(new Segment), tail_(head_) {}
  SpscQueue(const SpscQueue&) = delete;
  SpscQueue& operator=(const SpscQueue&) = delete;
  ~SpscQueue() {
    while (head_) {
      Segment* next = head_->next.load(std::memory_order_relaxed);
      delete head_;
      head_ = next;
    }
  }

  void push(T value) {
    if (tail_pos_ == kSegment) {
      Segment* seg = new Segment;
      tail_->next.store(seg, std::memory_order_release);
      tail_ = seg;
      tail_pos_ = 0;
    }
    tail_->slots[tail_pos_] = std::move(value);
    tail_->written.store(++tail_pos_, std::memory_order_release);
    size_.fetch_add(1, std::memory_order_release);
  }

  std::optional<T> pop() {
    if (head_pos_ == kSegment) {
      Segment* next = head_->next.load(std::memory_order_acquire);
      if (!next) return std::nullopt;
      delete head_;
      head_ = next;
      head_pos_ = 0;
    }
    if (head_pos_ >= head_->written.load(std::memory_order_acquire)) return std::nullopt;
    T value = std::move(head_->slots[head_pos_++]);
    size_.fetch_sub(1, std::memory_order_relaxed);
    return value;
  }

  // Safe from any thread; may lag a concurrent push or pop.
  std::size_t size() const noexcept { return size_.load(std::memory_order_acquire); }
  bool empty() const noexcept { return size() == 0; }

 private:
  static constexpr std::size_t kSegment = 256;
  struct Segment {
    T slots[kSegment]{};
    std::atomic<std::size_t> written{0};
    std::atomic<Segment*> next{nullptr};
  };

  // head_ belongs to the consumer, tail_ to the producer.
  alignas(64) Segment* head_;
  std::size_t head_pos_ = 0;
  alignas(64) Segment* tail_;
  std::size_t tail_pos_ = 0;
  std::atomic<std::size_t> size_{0};
};

class Mailbox;

// Exclusive right to pop submit messages from one mailbox. Move-only;
// released on destruction.
class SubmitLease {
 public:
  SubmitLease() = default;
  SubmitLease(SubmitLease&& other) noexcept : box_(std::exchange(other.box_, nullptr)) {}
  SubmitLease& operator=(SubmitLease&& other) noexcept {
    if (this != &other) {
      reset();
      box_ = std::exchange(other.box_, nullptr);
    }
    return *this;
  }
  ~SubmitLease() { reset(); }

  explicit operator bool() const noexcept { return box_ != nullptr; }
  Mailbox* mailbox() const noexcept { return box_; }
  void reset() noexcept;

 private:
  friend class Mailbox;
  explicit SubmitLease(Mailbox* box) noexcept : box_(box) {}
  Mailbox* box_ = nullptr;
};

// Per-worker request queues. The owning worker is the only producer. Submit
// messages keep their order and are drained by at most one leaseholder at a
// time; done messages may be popped by any number of threads concurrently.
class Mailbox {
 public:
  Mailbox() = default;
  Mailbox(const Mailbox&) = delete;
  Mailbox& operator=(const Mailbox&) = delete;

  void post_submit(SubmitTaskMessage msg) {
    assert(msg.creation_seq > last_posted_seq_ || last_posted_seq_ == 0);
    last_posted_seq_ = msg.creation_seq;
    submit_q_.push(msg);
    posted_submit_.fetch_add(1, std::memory_order_relaxed);
  }

  void post_done(DoneTaskMessage msg) {
    {
      std::lock_guard guard(done_lock_);
      done_q_.push_back(msg);
      done_size_.fetch_add(1, std::memory_order_release);
    }
    posted_done_.fetch_add(1, std::memory_order_relaxed);
  }

  // Non-blocking. An empty lease means another thread holds it.
  SubmitLease lease_submit_queue() noexcept {
    if (leased_.load(std::memory_order_relaxed) ||
        leased_.exchange(true, std::memory_order_acquire)) {
      return SubmitLease{};
    }
    return SubmitLease{this};
  }

  std::optional<SubmitTaskMessage> pop_submit(const SubmitLease& lease) {
    assert(lease.mailbox() == this && "pop_submit requires this mailbox's lease");
    if (lease.mailbox() != this) return std::nullopt;
    auto msg = submit_q_.pop();
    if (msg) consumed_submit_.fetch_add(1, std::memory_order_relaxed);
    return msg;
  }

  std::optional<DoneTaskMessage> pop_done() {
    if (done_size_.load(std::memory_order_acquire) == 0) return std::nullopt;
    std::lock_guard guard(done_lock_);
    if (done_q_.empty()) return std::nullopt;
    DoneTaskMessage msg = done_q_.front();
    done_q_.pop_front();
    done_size_.fetch_sub(1, std::memory_order_relaxed);
    consumed_done_.fetch_add(1, std::memory_order_relaxed);
    return msg;
  }

  bool has_submit() const noexcept { return !submit_q_.empty(); }
  bool has_done() const noexcept { return done_size_.load(std::memory_order_acquire) != 0; }
  bool empty() const noexcept { return !has_submit() && !has_done(); }
  bool leased() const noexcept { return leased_.load(std::memory_order_acquire); }

  struct Totals {
    std::uint64_t posted_submit, consumed_submit, posted_done, consumed_done;
  };
  Totals totals() const noexcept {
    return {posted_submit_.load(), consumed_submit_.load(), posted_done_.load(),
            consumed_done_.load()};
  }

 private:
  friend class SubmitLease;
  void release_lease() noexcept { leased_.store(false, std::memory_order_release); }

  SpscQueue<SubmitTaskMessage> submit_q_;
  std::uint64_t last_posted_seq_ = 0;
  alignas(64) std::atomic<bool> leased_{false};

  alignas(64) SpinLock done_lock_;
  std::deque<DoneTaskMessage> done_q_;
  std::atomic<std::size_t> done_size_{0};

  std::atomic<std::uint64_t> posted_submit_{0};
  std::atomic<std::uint64_t> consumed_submit_{0};
  std::atomic<std::uint64_t> posted_done_{0};
  std::atomic<std::uint64_t> consumed_done_{0};
};

inline void SubmitLease::reset() noexcept {
  if (box_) std::exchange(box_, nullptr)->release_lease();
}

}  // namespace taskrt
