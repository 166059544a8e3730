#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace mmdmix {

struct Tensor {
    std::vector<std::uint32_t> shape;
    std::vector<double> data;

    static Tensor zeros(std::vector<std::uint32_t> shape);
    std::size_t size() const { return data.size(); }
};

/// Named trainable parameters with paired gradient buffers and optimizer
/// accumulators. Entries iterate in sorted name order so initialization,
/// updates and checkpoints are deterministic.
class ParameterStore {
public:
    struct Entry {
        Tensor value;
        std::vector<double> grad;   // always value.size(), zero-initialized
        std::vector<double> accum;  // RMSProp second-moment accumulator
    };

    Tensor& add(const std::string& name, std::vector<std::uint32_t> shape);

    bool has(const std::string& name) const { return entries_.count(name) != 0; }
    Entry& entry(const std::string& name);
    const Entry& entry(const std::string& name) const;
    std::vector<double>& grad(const std::string& name) { return entry(name).grad; }

    void zero_grads();

    // Copies parameter values (bitwise) from a store with the identical
    // layout; gradients and accumulators of this store are untouched.
    void copy_values_from(const ParameterStore& other);

    std::size_t scalar_count() const;
    std::size_t entry_count() const { return entries_.size(); }

    auto begin() { return entries_.begin(); }
    auto end() { return entries_.end(); }
    auto begin() const { return entries_.begin(); }
    auto end() const { return entries_.end(); }

private:
    std::map<std::string, Entry> entries_;
};

// Checkpoint container: format tag, a config snapshot, then every parameter
// as (name, shape, row-major doubles) plus its optimizer accumulator.
// Binary little-endian; byte-stable given identical state.
void save_checkpoint(const ParameterStore& store, const std::string& path,
                     const std::string& config_text);

// Replaces the store contents; returns the embedded config snapshot.
std::string load_checkpoint(ParameterStore& store, const std::string& path);

} // namespace mmdmix
