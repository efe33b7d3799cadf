# pepa-psni package
__version__ = "0.1.0"
__author__ = "pepa-psni developers"
