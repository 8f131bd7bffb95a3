# Commands module for the seasonal ruin calculator
