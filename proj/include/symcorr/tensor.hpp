#pragma once

// Dense 64-bit tensors with reverse-mode automatic differentiation.
//
// Graph owns a tape of operation records in creation order (already a
// topological order); backward() walks it once in reverse. Parameters are
// leaf tensors with requires_grad set; they outlive the per-step graphs
// that reference them. Tensors are safe to share read-only across threads;
// mutation (training) requires exclusive access.

#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace symcorr {

using Shape = std::vector<int>;

std::int64_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

class Tensor;
using TensorPtr = std::shared_ptr<Tensor>;

class Tensor {
public:
    Tensor() = default;
    explicit Tensor(Shape shape, double fill = 0.0);
    Tensor(Shape shape, std::vector<double> values);

    static TensorPtr make(Shape shape, double fill = 0.0);
    static TensorPtr make(Shape shape, std::vector<double> values);

    const Shape& shape() const { return shape_; }
    int rank() const { return static_cast<int>(shape_.size()); }
    int dim(int i) const { return shape_[static_cast<std::size_t>(i)]; }
    std::int64_t size() const { return static_cast<std::int64_t>(value_.size()); }
    bool is_scalar() const { return value_.size() == 1; }

    std::vector<double>& values() { return value_; }
    const std::vector<double>& values() const { return value_; }
    double scalar() const;

    bool requires_grad() const { return requires_grad_; }
    void set_requires_grad(bool on) { requires_grad_ = on; }

    bool has_grad() const { return !grad_.empty(); }
    // Grad buffer, allocated zeroed on first use; always shape-matched.
    std::vector<double>& grad();
    const std::vector<double>& grad() const;
    void clear_grad() { grad_.clear(); }

    bool all_finite() const;

private:
    Shape shape_;
    std::vector<double> value_;
    std::vector<double> grad_;
    bool requires_grad_ = false;
};

enum class OpKind {
    Add,
    Mul,
    MatMul,
    Conv2d,
    Relu,
    Reshape,
    Sum,
    ChannelSqNorm,
    SqDistField,
    SpatialSoftmax,
    Log,
    Neg,
    Sqrt,
    AddScalar,
    MulScalar,
    PixelGather,
    CrossEntropy,
    ContrastiveBatch,
};

const char* op_name(OpKind kind);

// One (src pixel in A, dst pixel in B) pairing; coordinates are (row, col).
struct PixelPair {
    int src_u = 0, src_v = 0;
    int dst_u = 0, dst_v = 0;
};

class Graph {
public:
    // Elementwise; shapes must match exactly (no broadcasting).
    TensorPtr add(const TensorPtr& a, const TensorPtr& b);
    TensorPtr mul(const TensorPtr& a, const TensorPtr& b);
    // a:[m,k] x b:[k,n] -> [m,n]
    TensorPtr matmul(const TensorPtr& a, const TensorPtr& b);
    // x:[C,H,W], w:[O,C,KH,KW] (odd KH,KW), bias:[O] -> [O,H,W],
    // zero padding, stride 1.
    TensorPtr conv2d(const TensorPtr& x, const TensorPtr& w, const TensorPtr& bias);
    TensorPtr relu(const TensorPtr& x);
    TensorPtr reshape(const TensorPtr& x, Shape shape);
    // Sum of all elements -> [1].
    TensorPtr sum(const TensorPtr& x);
    // x:[C,H,W] -> [H,W], per-pixel squared L2 norm over the channel axis.
    TensorPtr channel_sqnorm(const TensorPtr& x);
    // vol:[C,H,W], vec:[C] -> [H,W], per-pixel squared distance to vec.
    TensorPtr sqdist_field(const TensorPtr& vol, const TensorPtr& vec);
    // x:[H,W] -> [H,W], softmax over the flattened spatial axis
    // (max-subtracted for stability).
    TensorPtr spatial_softmax(const TensorPtr& x);
    TensorPtr log(const TensorPtr& x);
    TensorPtr neg(const TensorPtr& x);
    TensorPtr sqrt(const TensorPtr& x);
    TensorPtr add_scalar(const TensorPtr& x, double c);
    TensorPtr mul_scalar(const TensorPtr& x, double c);
    // vol:[C,H,W] -> [C], the descriptor at pixel (u,v) = (row,col).
    TensorPtr pixel_gather(const TensorPtr& vol, int u, int v);
    // -sum(target * log(predicted)) over a [H,W] grid; target is constant
    // data (not differentiated), predicted must be strictly positive where
    // target is nonzero (softmax output qualifies). Returns [1].
    TensorPtr cross_entropy(const std::vector<double>& target, const TensorPtr& predicted);
    // Contrastive loss over descriptor volumes [D,H,W]: mean squared
    // descriptor distance over matches plus mean squared hinge
    // max(0, margin - distance)^2 over nonmatches. Returns [1].
    TensorPtr contrastive_batch(const TensorPtr& desc_a, const TensorPtr& desc_b,
                                std::vector<PixelPair> matches,
                                std::vector<PixelPair> nonmatches, double margin);

    // Populates grad on every requires_grad tensor reachable from loss.
    // loss must be a scalar produced by this graph; calling twice without
    // rebuilding the graph is an error.
    void backward(const TensorPtr& loss);

    std::size_t node_count() const { return nodes_.size(); }

private:
    struct Node {
        OpKind kind;
        std::vector<TensorPtr> inputs;
        TensorPtr out;
        bool needs_grad = false;
        double scalar = 0.0;          // AddScalar / MulScalar / margin
        int u = 0, v = 0;             // PixelGather
        std::vector<double> target;   // CrossEntropy
        std::vector<PixelPair> matches, nonmatches;  // ContrastiveBatch
    };

    TensorPtr record(Node node);
    void backward_node(const Node& node);
    bool flows_grad(const TensorPtr& t) const;

    std::vector<Node> nodes_;
    std::unordered_map<const Tensor*, std::size_t> produced_by_;
    std::unordered_set<const Tensor*> grad_flow_;
    bool backward_done_ = false;
};

// Central finite-difference gradient of f with respect to x (h = 1e-5).
// Test oracle; independent of Graph::backward.
std::vector<double> finite_difference_gradient(
    const std::function<double(const std::vector<double>&)>& f,
    const std::vector<double>& x, double h = 1e-5);

// Relative gradient agreement: |a-b| <= rel*max(|a|,|b|) or |a-b| <= abs_floor.
bool gradients_match(const std::vector<double>& autodiff, const std::vector<double>& fd,
                     double rel = 1e-4, double abs_floor = 1e-7,
                     double* worst_rel = nullptr);

}  // namespace symcorr
