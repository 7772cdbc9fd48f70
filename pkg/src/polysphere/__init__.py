"""Computable geometry of finite-dimensional polyhedral normed spaces."""
