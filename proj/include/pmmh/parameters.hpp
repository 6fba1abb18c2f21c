#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace pmmh {

// Named parameter block.  Fixed entries ride along (models read them) but are
// invisible to the samplers: pack/unpack touch only the free entries, in
// declaration order.
class ParameterVector {
  public:
    struct Entry {
        std::string name;
        double value = 0.0;
        bool fixed = false;
    };

    ParameterVector() = default;
    explicit ParameterVector(std::vector<Entry> entries);

    void add(std::string name, double value, bool fixed = false);

    // Number of free (non-fixed) entries.
    int dimension() const { return free_dim_; }
    int size() const { return static_cast<int>(entries_.size()); }

    bool has(const std::string& name) const;
    // Index into the full entry list; throws ConfigError for unknown names.
    int index_of(const std::string& name) const;
    double get(const std::string& name) const;
    void set(const std::string& name, double value);

    const Entry& entry(int i) const { return entries_[i]; }
    double value(int i) const { return entries_[i].value; }
    const std::vector<Entry>& entries() const { return entries_; }

    // Free entries as a dense vector, declaration order.
    Eigen::VectorXd pack() const;
    // Copy of this block with free entries replaced by v (fixed preserved).
    ParameterVector unpack(const Eigen::VectorXd& v) const;

    std::vector<std::string> free_names() const;

  private:
    std::vector<Entry> entries_;
    int free_dim_ = 0;
};

} // namespace pmmh
