#include <atomic>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "storval/parallel.hpp"

using namespace storval;

TEST_CASE("every index runs exactly once") {
  for (int threads : {1, 2, 7}) {
    std::vector<std::atomic<int>> hits(100);
    parallel_for(hits.size(), threads, [&](std::size_t i) { hits[i]++; });
    for (auto& h : hits) CHECK(h.load() == 1);
  }
  parallel_for(0, 4, [](std::size_t) { FAIL("no work expected"); });
}

TEST_CASE("inline execution keeps index order") {
  std::vector<std::size_t> order;
  parallel_for(5, 1, [&](std::size_t i) { order.push_back(i); });
  CHECK(order == std::vector<std::size_t>{0, 1, 2, 3, 4});
}

TEST_CASE("the smallest failing index is reported") {
  for (int threads : {1, 3}) {
    try {
      parallel_for(50, threads, [](std::size_t i) {
        if (i == 17 || i == 40) throw std::runtime_error("index " + std::to_string(i));
      });
      FAIL("expected an exception");
    } catch (const std::runtime_error& e) {
      CHECK(std::string(e.what()) == "index 17");
    }
  }
  CHECK(default_thread_count() >= 1);
}
