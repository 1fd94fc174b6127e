import os
import sys

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from qpf.entanglement_lab import WeightedGraph
from qpf.utils import ensure_directory

output_dir = "graphs"


def create_graph_templates(directory=output_dir):
    ensure_directory(directory)

    # Clifford star: |G_GHZ>, GHZ after F^dagger on the two leaves
    ghz = WeightedGraph.ghz()
    # Weighted star at phi = 2pi/3; `state am-graph --phi` overrides the weights
    star = WeightedGraph.star(3, 2.0943951023931953)

    written = []
    for name, graph, comment in (
        ("ghz3.g", ghz, "# GHZ graph: vertex 0 joined to vertices 1 and 2, multiplicity 1"),
        ("star3.g", star, "# weighted star for |J_GHZ>, edge weight 2pi/3"),
    ):
        path = os.path.join(directory, name)
        with open(path, "w", encoding="utf-8") as f:
            f.write(comment + "\n" + graph.to_text())
        written.append(path)
        print(f"Graph created: {path}")
    return written


if __name__ == "__main__":
    create_graph_templates()
