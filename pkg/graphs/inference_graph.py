"""
Infer workflow: from a centered dataset to an adjusted inference report.

separability -> fit -> probe -> solve -> report -> save

Each node returns a partial state update. A node that fails appends to
``errors``, sets ``exit_code``, and the conditional edge ends the run.
"""

from langgraph.graph import StateGraph, START, END

from engine.errors import HDLogitError, NonConvergenceError, SeparableDataError
from engine.inference import build_report, write_report
from engine.logistic_core import check_separable, fit_mle
from engine.probe_frontier import estimate_theory_params, probe
from engine.theory_engine import load_or_build_frontier
from schemas.experiment import InferenceState
from utils.logger import logger

NODES = ["separability", "fit", "probe", "solve", "report", "save"]


def _failure(node: str, exc: Exception) -> dict:
    exit_code = exc.exit_code if isinstance(exc, HDLogitError) else 1
    logger.error(f"{node} failed: {exc}")
    return {"errors": [f"{node}: {exc}"], "exit_code": exit_code}


def separability_node(state: InferenceState) -> dict:
    """Reject data whose cases and controls are completely separable."""
    try:
        report = check_separable(state["X"], state["y"])
    except HDLogitError as exc:
        return _failure("separability", exc)
    if report.separable:
        n, p = state["X"].shape
        return _failure(
            "separability",
            SeparableDataError(
                f"the data are completely separable (n={n}, p={p}, p/n={p / n:.3f}); the MLE does not "
                "exist. (kappa, gamma) lies above the phase-transition frontier, so no adjusted "
                "inference is possible"
            ),
        )
    logger.info("Data are not separable; the MLE exists")
    return {"errors": []}


def fit_node(state: InferenceState) -> dict:
    """Unrestricted maximum-likelihood fit."""
    try:
        fit = fit_mle(state["X"], state["y"])
    except HDLogitError as exc:
        return _failure("fit", exc)
    if not fit.converged:
        return _failure("fit", NonConvergenceError(f"MLE did not converge ({fit.diagnostic})", fit))
    logger.info(f"MLE converged in {fit.iterations} iterations (loglik={fit.loglik:.4f})")
    return {"fit": fit}


def probe_node(state: InferenceState) -> dict:
    """ProbeFrontier estimate of the signal strength (loads the frontier when none is given)."""
    threads = state.get("threads", 1)
    try:
        curve = state.get("curve")
        if curve is None:
            curve = load_or_build_frontier(
                state["cache_dir"], seed=state.get("frontier_seed"), threads=threads
            )
        result = probe(state["X"], state["y"], state["probe_config"], curve, threads=threads, check_full=False)
    except HDLogitError as exc:
        return _failure("probe", exc)
    return {"probe_result": result, "curve": curve}


def solve_node(state: InferenceState) -> dict:
    """Fixed point at the dataset's own kappa and gamma_hat."""
    n, p = state["X"].shape
    try:
        params = estimate_theory_params(p / n, state["probe_result"].gamma_hat, curve=state["curve"])
    except HDLogitError as exc:
        return _failure("solve", exc)
    logger.info(
        f"alpha_hat={params.alpha_star:.4f}, sigma_hat={params.sigma_star:.4f}, "
        f"lambda_hat={params.lambda_star:.4f}"
    )
    return {"params": params}


def report_node(state: InferenceState) -> dict:
    """Per-coordinate adjusted intervals and p-values."""
    try:
        report = build_report(
            state["X"],
            state["y"],
            state["fit"],
            state["params"],
            tau_source=state.get("tau_source", "rss"),
            level=state.get("level", 0.95),
            lrt=state.get("lrt", False),
            gamma_hat=state["probe_result"].gamma_hat,
            names=state.get("names"),
            threads=state.get("threads", 1),
        )
    except HDLogitError as exc:
        return _failure("report", exc)
    report.header["kappa_hat"] = state["probe_result"].kappa_hat
    return {"report": report}


def save_node(state: InferenceState) -> dict:
    """Write the report CSV and its JSON sidecar."""
    try:
        path = write_report(state["report"], state["output_path"])
    except OSError as exc:
        return _failure("save", exc)
    logger.info(f"✓ Saved report to: {path}")
    return {"saved_path": str(path)}


def _route(state: InferenceState) -> str:
    return "end" if state.get("errors") else "continue"


def create_inference_graph():
    """
    Create and compile the infer workflow.

    Architecture:
    - Nodes run sequentially from START
    - After every node, a conditional edge ends the run when errors were recorded
    - save writes the report and ends the workflow

    Returns:
        Compiled LangGraph workflow
    """
    logger.debug("Building inference graph...")

    workflow = StateGraph(InferenceState)

    workflow.add_node("separability", separability_node)
    workflow.add_node("fit", fit_node)
    workflow.add_node("probe", probe_node)
    workflow.add_node("solve", solve_node)
    workflow.add_node("report", report_node)
    workflow.add_node("save", save_node)

    workflow.add_edge(START, NODES[0])
    for current, following in zip(NODES, NODES[1:]):
        workflow.add_conditional_edges(current, _route, {"continue": following, "end": END})
    workflow.add_edge(NODES[-1], END)

    return workflow.compile()


# Create the compiled graph instance
inference_graph = create_inference_graph()
