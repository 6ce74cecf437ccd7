"""spinlab: Dirac operators on exactly solvable embedded geometries.

Clifford representations are built by parity-case tensor constructions,
model geometries carry analytic adapted frames, operators are assembled
spectrally, and every eigenvalue lower bound and limiting-case equation is
verified numerically.
"""

from .clifford import (
    CliffordRep,
    SplitRep,
    base_rep,
    build_rep,
    clifford_apply,
    tensor_construct,
    verify_identities,
    volume_element,
)
from .models import (
    AuxTorusModel,
    CircleProductModel,
    ConformalData,
    FlatTorusModel,
    SphereModel,
    build_model,
    conformal_scalar_curvature,
    gauss_formula_residual,
    spin_structure_oracle,
    yamabe_first_eigenvalue,
)
from .operators import (
    assemble_connection,
    assemble_Df,
    assemble_DH,
    assemble_twisted,
    conformal_transport,
    spectrum,
)
from .bounds import (
    BoundReport,
    EMTensor,
    NormalCurvature,
    compute_RN_psi,
    connection_identity_residual,
    energy_momentum,
    evaluate_bound,
    kappa1,
    limiting_case_residuals,
    q_choice,
    random_normal_curvature,
    sample_field,
)
from .spectral import FourierScalar, FourierSpinorField

__version__ = "0.1.0"
