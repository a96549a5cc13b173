"""er-cavity-toolkit: forward models and fitting for cavity-coupled Er:YSO ensembles"""
__version__ = '1.0.0'
__author__  = 'Er Cavity Toolkit Contributors'
__license__ = 'MIT'
