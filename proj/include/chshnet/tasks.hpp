#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace chshnet::tasks {

// One 4-bit input. x1 is the most significant bit of the canonical
// sample index: index = x1*8 + x2*4 + x3*2 + x4.
struct BitSample {
    uint8_t x1 = 0, x2 = 0, x3 = 0, x4 = 0;

    static BitSample from_index(int index);
    int index() const { return x1 * 8 + x2 * 4 + x3 * 2 + x4; }

    // 1-based accessor matching the task input indices.
    uint8_t bit(int input_index) const;

    bool operator==(const BitSample&) const = default;
};

enum class TaskKind { Identity, Xor };

// A binary prediction task over the four input bits: either a single
// input bit or the XOR of two distinct input bits.
struct TaskSpec {
    TaskKind kind = TaskKind::Identity;
    int a = 1;  // Identity source, or first XOR input (1-4)
    int b = 0;  // second XOR input (1-4), 0 for Identity

    static TaskSpec identity(int source);      // throws std::invalid_argument
    static TaskSpec xor_of(int a, int b);      // throws std::invalid_argument

    std::string name() const;  // "x1", "x1^x2", ...
    bool operator==(const TaskSpec&) const = default;
};

int eval_task(const TaskSpec& task, const BitSample& sample);

// One Alice/Bob task combination. i and j are the 1-based context
// indices; the four canonical pairs are (a1,b1),(a1,b2),(a2,b1),(a2,b2).
struct ContextPair {
    TaskSpec alice;
    TaskSpec bob;
    int i = 0;
    int j = 0;

    std::string name() const;  // "a1b1", ...
};

TaskSpec alpha(int i);  // a1 = x1, a2 = x1^x2
TaskSpec beta(int j);   // b1 = x3, b2 = x3^x4
const std::array<ContextPair, 4>& canonical_pairs();

struct LabeledRow {
    BitSample sample;
    uint8_t alice_label = 0;
    uint8_t bob_label = 0;
};

// All 16 samples in canonical order with labels for the given pair.
// Deterministic; the full enumeration doubles as train and eval set,
// so sample means over it are exact expectations under uniform inputs.
struct LabeledDataset {
    std::vector<LabeledRow> rows;
};

LabeledDataset enumerate_dataset(const ContextPair& pair);

}  // namespace chshnet::tasks
