#include "kuramoto/parallel.hpp"

#include <condition_variable>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "kuramoto/error.hpp"

namespace kuramoto {

namespace {

std::size_t read_thread_env() {
  const char* env = std::getenv("KURAMOTO_THREADS");
  if (env == nullptr || *env == '\0') return 1;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (*end != '\0' || v < 1) throw ConfigError(std::string("KURAMOTO_THREADS must be a positive integer, got '") + env + "'");
  return static_cast<std::size_t>(v);
}

thread_local bool inside_pool = false;

// Fixed pool of helper threads. Worker w handles block w + 1; the calling
// thread handles block 0.
class Pool {
 public:
  explicit Pool(std::size_t helpers) {
    for (std::size_t w = 0; w < helpers; ++w) threads_.emplace_back([this, w] { loop(w + 1); });
  }

  ~Pool() {
    {
      std::lock_guard lock(mutex_);
      stop_ = true;
    }
    wake_.notify_all();
    for (auto& t : threads_) t.join();
  }

  std::size_t workers() const { return threads_.size() + 1; }

  void run(std::size_t n, const std::function<void(std::size_t)>& body) {
    std::lock_guard serial(run_mutex_);
    {
      std::lock_guard lock(mutex_);
      body_ = &body;
      n_ = n;
      pending_ = threads_.size();
      error_ = nullptr;
      ++generation_;
    }
    wake_.notify_all();
    run_block(0);
    std::unique_lock lock(mutex_);
    done_.wait(lock, [this] { return pending_ == 0; });
    body_ = nullptr;
    if (error_) std::rethrow_exception(error_);
  }

 private:
  void run_block(std::size_t block) {
    const std::size_t w = workers();
    const std::size_t begin = n_ * block / w;
    const std::size_t end = n_ * (block + 1) / w;
    inside_pool = true;
    try {
      for (std::size_t i = begin; i < end; ++i) (*body_)(i);
      inside_pool = false;
    } catch (...) {
      inside_pool = false;
      std::lock_guard lock(mutex_);
      if (!error_) error_ = std::current_exception();
    }
  }

  void loop(std::size_t block) {
    std::size_t seen = 0;
    for (;;) {
      {
        std::unique_lock lock(mutex_);
        wake_.wait(lock, [&] { return stop_ || generation_ != seen; });
        if (stop_) return;
        seen = generation_;
      }
      run_block(block);
      {
        std::lock_guard lock(mutex_);
        --pending_;
      }
      done_.notify_one();
    }
  }

  std::vector<std::thread> threads_;
  std::mutex run_mutex_;
  std::mutex mutex_;
  std::condition_variable wake_;
  std::condition_variable done_;
  const std::function<void(std::size_t)>* body_ = nullptr;
  std::size_t n_ = 0;
  std::size_t pending_ = 0;
  std::size_t generation_ = 0;
  std::exception_ptr error_;
  bool stop_ = false;
};

Pool& pool() {
  static Pool p(thread_count() - 1);
  return p;
}

}  // namespace

std::size_t thread_count() {
  static const std::size_t n = read_thread_env();
  return n;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  if (n == 0) return;
  // Nested calls from inside a worker run inline.
  if (thread_count() == 1 || n == 1 || inside_pool) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  pool().run(n, body);
}

}  // namespace kuramoto
