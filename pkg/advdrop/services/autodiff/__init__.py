from advdrop.services.autodiff.tensor import (
    Graph,
    Parameter,
    Tensor,
    add,
    as_tensor,
    backward,
    elementwise,
    exp,
    expand_rows,
    ln,
    matmul,
    maximum,
    mse,
    mul,
    neg,
    no_grad,
    precision,
    reduce,
    reduce_mean,
    reduce_sum,
    relu,
    sigmoid,
    softmax_cross_entropy,
    softplus,
    transpose,
)

__all__ = [
    "Graph", "Parameter", "Tensor", "add", "as_tensor", "backward", "elementwise",
    "exp", "expand_rows", "ln", "matmul", "maximum", "mse", "mul", "neg", "no_grad",
    "precision", "reduce", "reduce_mean", "reduce_sum", "relu", "sigmoid",
    "softmax_cross_entropy", "softplus", "transpose",
]
