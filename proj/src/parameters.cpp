#include "pmmh/parameters.hpp"

#include "pmmh/errors.hpp"

namespace pmmh {

ParameterVector::ParameterVector(std::vector<Entry> entries) {
    for (auto& e : entries) add(std::move(e.name), e.value, e.fixed);
}

void ParameterVector::add(std::string name, double value, bool fixed) {
    for (const auto& e : entries_) {
        if (e.name == name) throw ConfigError("duplicate parameter name: " + name);
    }
    entries_.push_back({std::move(name), value, fixed});
    if (!entries_.back().fixed) ++free_dim_;
}

bool ParameterVector::has(const std::string& name) const {
    for (const auto& e : entries_) {
        if (e.name == name) return true;
    }
    return false;
}

int ParameterVector::index_of(const std::string& name) const {
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (entries_[i].name == name) return static_cast<int>(i);
    }
    throw ConfigError("unknown parameter name: " + name);
}

double ParameterVector::get(const std::string& name) const {
    return entries_[static_cast<std::size_t>(index_of(name))].value;
}

void ParameterVector::set(const std::string& name, double value) {
    entries_[static_cast<std::size_t>(index_of(name))].value = value;
}

Eigen::VectorXd ParameterVector::pack() const {
    Eigen::VectorXd v(free_dim_);
    int j = 0;
    for (const auto& e : entries_) {
        if (!e.fixed) v[j++] = e.value;
    }
    return v;
}

ParameterVector ParameterVector::unpack(const Eigen::VectorXd& v) const {
    if (v.size() != free_dim_)
        throw ConfigError("unpack: expected " + std::to_string(free_dim_) +
                          " values, got " + std::to_string(v.size()));
    ParameterVector out = *this;
    int j = 0;
    for (auto& e : out.entries_) {
        if (!e.fixed) e.value = v[j++];
    }
    return out;
}

std::vector<std::string> ParameterVector::free_names() const {
    std::vector<std::string> names;
    names.reserve(static_cast<std::size_t>(free_dim_));
    for (const auto& e : entries_) {
        if (!e.fixed) names.push_back(e.name);
    }
    return names;
}

} // namespace pmmh
