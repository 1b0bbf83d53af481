# Define the task plan
task_plan = [
    # Approach the half-eaten apple with moderate speed for better precision
    # and sufficient obstacle clearance
    (0, 'approach', ('half-eaten apple', 0.5, 0.03, 'side')),
    
    # Pick the apple from the side to make sure we have a secure grip before lifting
    (1, 'pick', ('half-eaten apple', 0.5, 0.03, 'side')),
    
    # Place the apple in the large red trash can with less concern for its orientation
    (2, 'place', ('large red trash can', 0.2, 0.5, 0.03)),
    
    # Approach the glass with yellowish liquid slowly to avoid spilling the liquid
    (3, 'approach', ('glass with yellowish liquid', 0.5, 0.05, 'top')),
    
    # Pick the glass from the top to prevent spilling the liquid while maneuvering it
    (4, 'pick', ('glass with yellowish liquid', 0.5, 0.05, 'top')),
    
    # Drop the glass in the large red trash can without needing to maintain its orientation
    (5, 'drop', ('large red trash can', 0.5, 0.05))
]
