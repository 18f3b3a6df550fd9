"""Explainable sell-through-rate forecasting for new fashion products.

The package is organised around the life of a forecast:

- :mod:`str_studio.ingest` turns raw sales/inventory/product/store files
  into an encoded, weighted training dataset of 4-week sell-through rates.
- :mod:`str_studio.gbdt` is a from-scratch weighted gradient-boosted tree
  regressor with missing-value routing, CV tuning and serialization.
- :mod:`str_studio.uncertainty` pairs a mean model with a squared-error
  model to produce Gaussian prediction intervals at any coverage.
- :mod:`str_studio.explain` provides gain importance, exact path-dependent
  TreeSHAP attributions, partial dependence and SHAP dependence data.
- :mod:`str_studio.counterfactual` answers what-if sweeps and searches for
  minimal feature changes reaching a target forecast.
- :mod:`str_studio.service` exposes everything over a CLI and an HTTP API.
"""

__version__ = "0.1.0"
