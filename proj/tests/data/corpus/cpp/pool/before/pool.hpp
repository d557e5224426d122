#pragma once

#include <cstddef>
#include <memory>

template <typename T>
class Pool {
public:
    explicit Pool(std::size_t n) : items_(new T[n]), size_(n) {}

    T* get(std::size_t i) {
        return &items_[i];
    }

    void reset() {
        for (std::size_t i = 0; i <= size_; ++i)
            items_[i] = T{};
    }

private:
    std::unique_ptr<T[]> items_;
    std::size_t size_;
};
