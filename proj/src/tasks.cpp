#include "chshnet/tasks.hpp"

#include <stdexcept>

namespace chshnet::tasks {

BitSample BitSample::from_index(int index) {
    if (index < 0 || index > 15) throw std::invalid_argument("sample index out of range");
    BitSample s;
    s.x1 = static_cast<uint8_t>((index >> 3) & 1);
    s.x2 = static_cast<uint8_t>((index >> 2) & 1);
    s.x3 = static_cast<uint8_t>((index >> 1) & 1);
    s.x4 = static_cast<uint8_t>(index & 1);
    return s;
}

uint8_t BitSample::bit(int input_index) const {
    switch (input_index) {
        case 1: return x1;
        case 2: return x2;
        case 3: return x3;
        case 4: return x4;
        default: throw std::invalid_argument("input index must be 1..4");
    }
}

TaskSpec TaskSpec::identity(int source) {
    if (source < 1 || source > 4) throw std::invalid_argument("identity source must be 1..4");
    return TaskSpec{TaskKind::Identity, source, 0};
}

TaskSpec TaskSpec::xor_of(int a, int b) {
    if (a < 1 || a > 4 || b < 1 || b > 4) throw std::invalid_argument("xor inputs must be 1..4");
    if (a == b) throw std::invalid_argument("xor inputs must be distinct");
    return TaskSpec{TaskKind::Xor, a, b};
}

std::string TaskSpec::name() const {
    if (kind == TaskKind::Identity) return "x" + std::to_string(a);
    return "x" + std::to_string(a) + "^x" + std::to_string(b);
}

int eval_task(const TaskSpec& task, const BitSample& sample) {
    if (task.kind == TaskKind::Identity) return sample.bit(task.a);
    return sample.bit(task.a) ^ sample.bit(task.b);
}

std::string ContextPair::name() const {
    return "a" + std::to_string(i) + "b" + std::to_string(j);
}

TaskSpec alpha(int i) {
    if (i == 1) return TaskSpec::identity(1);
    if (i == 2) return TaskSpec::xor_of(1, 2);
    throw std::invalid_argument("alice task index must be 1 or 2");
}

TaskSpec beta(int j) {
    if (j == 1) return TaskSpec::identity(3);
    if (j == 2) return TaskSpec::xor_of(3, 4);
    throw std::invalid_argument("bob task index must be 1 or 2");
}

const std::array<ContextPair, 4>& canonical_pairs() {
    static const std::array<ContextPair, 4> pairs = {
        ContextPair{alpha(1), beta(1), 1, 1},
        ContextPair{alpha(1), beta(2), 1, 2},
        ContextPair{alpha(2), beta(1), 2, 1},
        ContextPair{alpha(2), beta(2), 2, 2},
    };
    return pairs;
}

LabeledDataset enumerate_dataset(const ContextPair& pair) {
    LabeledDataset ds;
    ds.rows.reserve(16);
    for (int k = 0; k < 16; ++k) {
        LabeledRow row;
        row.sample = BitSample::from_index(k);
        row.alice_label = static_cast<uint8_t>(eval_task(pair.alice, row.sample));
        row.bob_label = static_cast<uint8_t>(eval_task(pair.bob, row.sample));
        ds.rows.push_back(row);
    }
    return ds;
}

}  // namespace chshnet::tasks
