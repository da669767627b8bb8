"""Guaranteed upper and lower bounds on influence in the independent cascade model."""
from .errors import (
    DuplicateEdgeError,
    EmptySeedSetError,
    GenerationFailure,
    IndexOutOfRangeError,
    InfboundError,
    InvalidBoundsError,
    InvalidHorizonError,
    InvalidParamsError,
    ModelError,
    ParseError,
    ProbOutOfRangeError,
    SelfLoopError,
    TooManyEdgesError,
)
from .generators import GenSpec, generate, largest_connected_component
from .graph import (
    ICModel,
    build_ic_model,
    from_undirected,
    load_edge_list,
    save_edge_list,
)
from .nblb import LBVector, Mdas, build_mdas, nb_lb, process_incoming_msg_lb
from .nbub import (
    UBTable,
    generate_outgoing_msg_ub,
    nb_ub,
    process_incoming_msg_ub,
    sigma_plus,
)
from .oracle import (
    InfectionProbabilities,
    McEstimate,
    exact_influence,
    exact_subnetwork_influence,
    mc_influence,
    path_union_prob,
    variance_upper_bound,
)
from .tunable import TunableParams, t_nb_lb, t_nb_ub

__version__ = "0.1.0"
