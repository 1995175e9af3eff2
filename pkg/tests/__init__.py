"""
__init__.py for the tests package.
"""
