"""Colormap and scalar-field recovery from legendless visualizations."""

from .colormapping import (
    RgbImage,
    ScalarField,
    decode_image,
    encode_png,
    read_field,
    read_image,
    render,
    render_adjoint,
    spline_derivative,
    write_field,
    write_image,
)
from .losses import (
    LossAnchors,
    LossReport,
    LossWeights,
    color_fidelity_loss,
    color_order_loss,
    data_fidelity_loss,
    loss_gradients,
    reconstruction_loss,
    total_loss,
)
from .recovery import (
    Adam,
    OptimizerConfig,
    RecoveryError,
    RecoveryResult,
    canonicalize,
    initialize,
    reconstruct,
    recover,
)
from .spline import (
    Colormap,
    basis,
    basis_matrix,
    clamped_uniform_knots,
    eval_colormap,
    eval_colormap_gradient,
    gray_colormap,
    greville_abscissae,
    load_colormap,
    sample_colormap,
    save_colormap,
)

__version__ = "0.1.0"
