"""Example-based recourse explanations (counterfactual, prototypical,
directive) for tabular classifiers, a seven-question actionability study
harness, and the nonparametric analysis of collected ratings."""

from .assessment import (
    PAIRWISE_PROMPT,
    PairwiseResponse,
    Question,
    RatingResponse,
    ResponseStore,
    Session,
    build_study_plan,
    export_responses,
    instrument,
    read_export,
)
from .counterfactual import (
    CounterfactualConfig,
    CounterfactualResult,
    distance_l1_mad,
    find_counterfactual,
)
from .data import (
    Dataset,
    Encoding,
    FeatureSchema,
    FeatureSpec,
    Instance,
    LinearClassifier,
    MadWeights,
    TrainConfig,
    encode,
    load_dataset,
    load_schema,
    mad_weights,
    predict,
    train_logistic,
)
from .mcts import (
    Action,
    DirectivePlan,
    MctsConfig,
    SearchNode,
    apply_action,
    backpropagate,
    build_root,
    expand,
    generate_directives,
    simulate,
    uct_select,
)
from .prototypes import (
    PrototypeSet,
    kernel_matrix,
    median_heuristic_bandwidth,
    protodash_select,
    top_prototype,
)
from .scenarios import (
    Corpus,
    ExplanationText,
    Scenario,
    display_text,
    load_corpus,
    load_scenarios,
    render_explanation,
)
from .stats import (
    AnalysisReport,
    analyze_pairwise,
    analyze_ratings,
    chi2_sf,
    chi_square_gof,
    friedman,
    nemenyi,
    studentized_range_sf,
)

__version__ = "0.1.0"
