#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "deeptop/rng.hpp"

namespace deeptop {

// Agent-facing state: scalar component plus encoded vector component.
struct ScalarVectorState {
    double lambda = 0.0;
    std::vector<double> v;
};

struct Transition {
    ScalarVectorState state;
    int action = 0;  // {0, 1}
    double reward = 0.0;
    ScalarVectorState next_state;
};

// Fixed-capacity ring buffer with uniform with-replacement minibatch
// sampling. Oldest entry is overwritten once capacity is reached.
template <class T>
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
        if (capacity == 0) throw std::invalid_argument("replay capacity must be positive");
        buffer_.reserve(capacity);
    }

    std::size_t size() const { return buffer_.size(); }
    std::size_t capacity() const { return capacity_; }

    void push(T item) {
        if (buffer_.size() < capacity_) {
            buffer_.push_back(std::move(item));
        } else {
            buffer_[cursor_] = std::move(item);
        }
        cursor_ = (cursor_ + 1) % capacity_;
    }

    const T& operator[](std::size_t i) const { return buffer_[i]; }

    // B independent uniform draws; refuses when the buffer holds fewer than
    // B items, which signals a warmup ordering bug upstream.
    std::vector<const T*> sample_minibatch(std::size_t batch, Rng& rng) const {
        if (buffer_.size() < batch)
            throw std::logic_error("replay: minibatch requested before warmup filled the buffer");
        std::vector<const T*> out(batch);
        for (std::size_t k = 0; k < batch; ++k)
            out[k] = &buffer_[rng.uniform_int(buffer_.size())];
        return out;
    }

private:
    std::size_t capacity_;
    std::size_t cursor_ = 0;
    std::vector<T> buffer_;
};

using ReplayMemory = ReplayBuffer<Transition>;

}  // namespace deeptop
