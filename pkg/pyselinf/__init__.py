"""
Python selective inference library
~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~

pyselinf computes p-values, confidence intervals and selective maximum
likelihood estimates after variable selection with the randomized lasso or
data carving.

Overview
~~~~~~~~

The conditional law of a selected coefficient is a Gaussian whose nuisance
part is restricted to the positive orthant.  pyselinf evaluates integrals
against that law with the separation-of-variable (SOV) transform driven by
scrambled Sobol' points, which gives precise estimates together with
replicate-based error bars.

Library usage
~~~~~~~~~~~~~

In general a three-stage pipeline is used:

    1. Build a dataset and run selection to get a selection record
    2. Generate a replicated set of randomized QMC points
    3. Run inference on the record using the points

.. code-block:: python

    from pyselinf.selection.dataset import Dataset
    from pyselinf.selection.carving import carve_and_select
    from pyselinf.qmc.batchfactory import replicate_set
    from pyselinf.inference.intervals import confidence_intervals

    data = Dataset(X, Y, sigma2=1.0)
    record = carve_and_select(data, lam=40.0, rho=0.8, seed=1)
    reps = replicate_set(record.d, 256, 8, seed=2)
    report = confidence_intervals(record, 0.05, reps)
    print(report.to_frame())

"""
import logging

# Local builds carry the 'dev' suffix
__version__ = '1.0.0'

logging.getLogger(__name__).addHandler(logging.NullHandler())
