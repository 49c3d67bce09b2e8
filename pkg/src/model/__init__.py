# Backbone layers, PE-GNN assembly, losses, checkpoints
