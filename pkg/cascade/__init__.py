# Módulo da ordem em cascata (incidência, graus, CCDF)
from cascade.incidence import (CascadingOrder, CcdfCurve, IncidenceMatrix, cascading_order,
                               ccdf_curve, degree_ratios, incidence_and_degrees,
                               triangularity_violations)

__all__ = ['CascadingOrder', 'CcdfCurve', 'IncidenceMatrix', 'cascading_order', 'ccdf_curve',
           'degree_ratios', 'incidence_and_degrees', 'triangularity_violations']
