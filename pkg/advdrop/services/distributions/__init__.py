from advdrop.services.distributions.divergence import kl_divergence, truncated_support
from advdrop.services.distributions.families import (
    Family,
    InverseGamma,
    LogNormal,
    SoftplusGaussian,
    pdf_softplus_gaussian,
    softplus_inverse,
)
from advdrop.services.distributions.fitting import fit, mode_match, moment_match
from advdrop.services.distributions.model_free import (
    MappingFunction,
    ModelFreeDist,
    cdf,
    dropout_rate,
    logit,
    mask_kl,
    mean_mask,
    normalization,
    pdf,
    sample_mask,
    seed_normalization,
)
