from .operator import DdimOperator
