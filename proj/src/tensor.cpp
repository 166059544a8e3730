#include "tensor.hpp"

#include "errors.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace mmdmix {

Tensor Tensor::zeros(std::vector<std::uint32_t> shape) {
    std::size_t n = 1;
    for (auto d : shape) n *= d;
    Tensor t;
    t.shape = std::move(shape);
    t.data.assign(n, 0.0);
    return t;
}

Tensor& ParameterStore::add(const std::string& name, std::vector<std::uint32_t> shape) {
    if (entries_.count(name))
        throw ConfigError("parameter '" + name + "' already exists");
    Entry e;
    e.value = Tensor::zeros(std::move(shape));
    e.grad.assign(e.value.size(), 0.0);
    e.accum.assign(e.value.size(), 0.0);
    return entries_.emplace(name, std::move(e)).first->second.value;
}

ParameterStore::Entry& ParameterStore::entry(const std::string& name) {
    auto it = entries_.find(name);
    if (it == entries_.end())
        throw ConfigError("unknown parameter '" + name + "'");
    return it->second;
}

const ParameterStore::Entry& ParameterStore::entry(const std::string& name) const {
    auto it = entries_.find(name);
    if (it == entries_.end())
        throw ConfigError("unknown parameter '" + name + "'");
    return it->second;
}

void ParameterStore::zero_grads() {
    for (auto& [name, e] : entries_)
        std::fill(e.grad.begin(), e.grad.end(), 0.0);
}

void ParameterStore::copy_values_from(const ParameterStore& other) {
    if (entries_.size() != other.entries_.size())
        throw ContractViolation("parameter store layouts differ (entry count)");
    auto it = entries_.begin();
    auto jt = other.entries_.begin();
    for (; it != entries_.end(); ++it, ++jt) {
        if (it->first != jt->first || it->second.value.shape != jt->second.value.shape)
            throw ContractViolation("parameter store layouts differ at '" + it->first + "'");
        it->second.value.data = jt->second.value.data;
    }
}

std::size_t ParameterStore::scalar_count() const {
    std::size_t n = 0;
    for (const auto& [name, e] : entries_) n += e.value.size();
    return n;
}

namespace {

constexpr char kMagic[8] = {'M', 'M', 'D', 'C', 'K', 'P', 'T', '1'};

void put_u64(std::ostream& os, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    os.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t get_u64(std::istream& is) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

void put_doubles(std::ostream& os, const std::vector<double>& v) {
    os.write(reinterpret_cast<const char*>(v.data()),
             static_cast<std::streamsize>(v.size() * sizeof(double)));
}

void get_doubles(std::istream& is, std::vector<double>& v) {
    is.read(reinterpret_cast<char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
}

} // namespace

void save_checkpoint(const ParameterStore& store, const std::string& path,
                     const std::string& config_text) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw IoError("cannot open checkpoint file for writing: " + tmp);
        os.write(kMagic, sizeof(kMagic));
        put_u64(os, config_text.size());
        os.write(config_text.data(), static_cast<std::streamsize>(config_text.size()));
        put_u64(os, store.entry_count());
        for (const auto& [name, e] : store) {
            put_u64(os, name.size());
            os.write(name.data(), static_cast<std::streamsize>(name.size()));
            put_u64(os, e.value.shape.size());
            for (auto d : e.value.shape) put_u64(os, d);
            put_doubles(os, e.value.data);
            put_doubles(os, e.accum);
        }
        if (!os) throw IoError("write failed for checkpoint: " + tmp);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot move checkpoint into place: " + path + " (" + ec.message() + ")");
}

std::string load_checkpoint(ParameterStore& store, const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open checkpoint file: " + path);
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, kMagic, 8) != 0)
        throw IoError("not a checkpoint file (bad magic): " + path);
    std::string config_text(get_u64(is), '\0');
    is.read(config_text.data(), static_cast<std::streamsize>(config_text.size()));
    const std::uint64_t n = get_u64(is);
    ParameterStore fresh;
    for (std::uint64_t i = 0; i < n; ++i) {
        std::string name(get_u64(is), '\0');
        is.read(name.data(), static_cast<std::streamsize>(name.size()));
        std::vector<std::uint32_t> shape(get_u64(is));
        for (auto& d : shape) d = static_cast<std::uint32_t>(get_u64(is));
        fresh.add(name, shape);
        auto& e = fresh.entry(name);
        get_doubles(is, e.value.data);
        get_doubles(is, e.accum);
        if (!is) throw IoError("truncated checkpoint: " + path);
    }
    store = std::move(fresh);
    return config_text;
}

} // namespace mmdmix
