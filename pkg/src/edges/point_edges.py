"""
Experiment Point Edges - wiring of the point graph

START -> cache_check -(cached)-> END
                     -(new)---> generate_data -(sweep)----> train_pool -> fit_baselines -> train_maes
                                              -(ablation)-> train_maes
train_maes -> evaluate -> persist -> END
"""

from langgraph.graph import END, START


def route_after_cache(state) -> str:
    return "cached" if state.get("cached") else "new"


def route_by_mode(state) -> str:
    return "ablation" if state.get("mode") == "ablation" else "sweep"


def create_point_edges(graph_builder):
    """Add all point edges to the graph builder"""

    graph_builder.add_edge(START, "cache_check")
    graph_builder.add_conditional_edges(
        "cache_check",
        route_after_cache,
        {"cached": END, "new": "generate_data"},
    )
    graph_builder.add_conditional_edges(
        "generate_data",
        route_by_mode,
        {"sweep": "train_pool", "ablation": "train_maes"},
    )
    graph_builder.add_edge("train_pool", "fit_baselines")
    graph_builder.add_edge("fit_baselines", "train_maes")
    graph_builder.add_edge("train_maes", "evaluate")
    graph_builder.add_edge("evaluate", "persist")
    graph_builder.add_edge("persist", END)

    return graph_builder
