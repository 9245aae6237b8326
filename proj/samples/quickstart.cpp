// Four threads share one flat-parallel queue, then the main thread drains it.

#include <iostream>
#include <thread>
#include <vector>

#include "flatpq/flatpq.hpp"

int main() {
  flatpq::flat_parallel_queue queue;

  std::vector<std::jthread> workers;
  for (int t = 0; t < 4; ++t) {
    workers.emplace_back([&queue, t] {
      auto h = queue.attach();
      for (int i = 0; i < 5; ++i) h.insert(t * 10 + i);
      h.extract_min();
    });
  }
  workers.clear();

  auto h = queue.attach();
  std::cout << "left:";
  while (auto k = h.extract_min()) std::cout << ' ' << *k;
  std::cout << '\n';

  // The kernels also run on a plain heap.
  flatpq::binary_heap heap(16);
  for (flatpq::key_type x : {7, 3, 9, 1, 5}) heap.insert_classic(x);
  flatpq::thread_executor exec;
  const flatpq::key_type batch[] = {4, 2, 8};
  flatpq::bulk_insert(heap, batch, exec);
  for (flatpq::key_type x : flatpq::bulk_extract(heap, 3, {}, exec)) std::cout << x << ' ';
  std::cout << "| size " << heap.size() << '\n';
}
