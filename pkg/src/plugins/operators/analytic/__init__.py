from .operator import AnalyticOperator
