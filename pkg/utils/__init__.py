# utils package




