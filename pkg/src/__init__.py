"""sinkhorn-lab: entropic optimal transport experiments (src/ is the import root)"""
