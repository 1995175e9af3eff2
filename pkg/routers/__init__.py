"""
HTTP routers: single-network evaluations and scanner workflows.
"""
