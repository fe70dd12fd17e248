"""Assembly of per-window layers into one multiplex temporal network.

Layers are chained in window order: whenever the same user survives the
backbone in two adjacent windows, an inter-layer coupling of strength
``omega`` ties the two node-slices together, which is what lets community
detection follow users across time.
"""

from __future__ import annotations

from dataclasses import dataclass

from .layers import LayerGraph

Coupling = tuple[str, int, int]


@dataclass
class MultiplexNetwork:
    """Ordered similarity layers plus identity couplings between them."""

    layers: list[LayerGraph]
    couplings: list[Coupling]
    omega: float

    @property
    def n_layers(self) -> int:
        return len(self.layers)

    @property
    def n_slices(self) -> int:
        return sum(len(layer.nodes) for layer in self.layers)

    def slices(self) -> list[tuple[str, int]]:
        """All (user, window) node-slices in deterministic order."""
        out = []
        for layer in self.layers:
            out.extend((user, layer.window_index) for user in sorted(layer.nodes))
        return out


def assemble_multiplex(layers: list[LayerGraph], omega: float) -> MultiplexNetwork:
    """Chain layers with one coupling per user per adjacent-layer pair.

    Couplings only join adjacent layers (a user absent from the window in
    between gets no long-range link) and only users present on both sides.
    """
    if not layers:
        raise ValueError("cannot assemble a multiplex network from zero layers")
    if omega < 0:
        raise ValueError(f"omega must be >= 0, got {omega}")
    for i, layer in enumerate(layers):
        if layer.window_index != i:
            raise ValueError(
                f"layers must be ordered by window index; "
                f"position {i} holds window {layer.window_index}"
            )
    couplings: list[Coupling] = []
    for i in range(len(layers) - 1):
        shared = layers[i].nodes & layers[i + 1].nodes
        couplings.extend((user, i, i + 1) for user in sorted(shared))
    return MultiplexNetwork(layers=list(layers), couplings=couplings, omega=omega)
