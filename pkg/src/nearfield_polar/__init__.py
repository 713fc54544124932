"""Near-field LoS MIMO between a polarized ULA and a single polarized UE."""

__version__ = "0.1.0"

from .geometry import PhysicalConstants, UePosition, UlaGeometry, all_rays, ray
from .channel import PolarizationConfig, Scenario, element_channel, equivalent_channel, truncate
from .spectrum import (beta_sums, closed_form_eigenvalues, exact_gramian, far_field_probe,
                       integral_beta_approx)
from .capacity import (achievable_rate, alpha_function, dof_slope, high_snr_rate,
                       optimal_epsilon, optimal_spacing, waterfill)
from .beamfocus import design_precoder, focal_region, focus_sweep, mismatched_rate
