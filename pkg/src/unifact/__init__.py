"""unifact: finite unitary groups, their structured subgroups, and exact
certification of subgroup factorizations G = HK."""

from .ff import FieldElt, FieldSpec, field, pick_zeta, solve_lambda, solve_mu
from .unispace import (
    Subspace,
    UnitarySpace,
    Vector,
    form_eval,
    norm_one_domain,
    perp,
    space_for,
    standard_objects,
)
from .grp import (
    BigCount,
    GroupHandle,
    SemilinearMap,
    act,
    bsgs_order,
    derived_core,
    intersection,
    membership,
    orbit,
    perm_image,
    stabilizer,
    subspace_stabilizer,
)
from .construct import (
    assemble,
    build_ext_subgroup,
    build_g2,
    build_gamma,
    build_levi_T,
    build_outer,
    build_phi,
    build_radical_R,
    build_sp2m_in_su,
    build_su,
    import_generators,
    export_generators,
    order_g2,
    order_sl,
    order_sp,
    order_su,
)
from .verify import (
    FactorizationCertificate,
    RCoverageReport,
    certify_product,
    check_r_coverage,
    fingerprint,
    hk_member,
    property_conjugation,
    property_subgroup_product,
    run_table_row,
)

__version__ = "0.1.0"
