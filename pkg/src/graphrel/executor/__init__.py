from .traversal import Counters, TraversalConstraints, bfs_scan, dfs_scan, sp_scan

__all__ = ["Counters", "TraversalConstraints", "bfs_scan", "dfs_scan", "sp_scan"]
