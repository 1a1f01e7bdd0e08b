# Módulo do domicílio representativo
from household.demand import HouseholdModel, expenditure_shares, price_index
from household.lambda_iv import (Diagnostic, LambdaEstimate, RegressionData, estimate_lambda,
                                 first_difference_data, weighted_ols)

__all__ = ['Diagnostic', 'HouseholdModel', 'LambdaEstimate', 'RegressionData',
           'estimate_lambda', 'expenditure_shares', 'first_difference_data', 'price_index',
           'weighted_ols']
