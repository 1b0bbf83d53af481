evaluation_plan = [
    # After action 0 (approach half-eaten apple)
    (0, {'can_grasp': ('half-eaten apple', 'side'), 
         'collision_free': (), 
         'timeout': (), 
         'check_motion_health': (),
         'can_reach': ('half-eaten apple', 'side')}, 
        (True, '', True, True, True)),
    
    # After action 1 (pick a half-eaten apple)
    (1, {'holding': (), 
         'collision_free': (), 
         'timeout': (), 
         'check_motion_health': ()}, 
        (True, '', True, True)),
    
    # After action 2 (place a half-eaten apple in the trash can)
    (2, {'at_location': ('half-eaten apple', 'large red trash can'), 
         'collision_free': (), 
         'timeout': (), 
         'check_motion_health': ()}, 
        (True, '', True, True)),
    
    # After action 3 (approach glass with yellowish liquid)
    (3, {'can_grasp': ('glass with yellowish liquid', 'top'), 
         'collision_free': (), 
         'timeout': (), 
         'check_motion_health': (), 
         'can_reach': ('glass with yellowish liquid', 'top')}, 
        (True, '', True, True, True)),
    
    # After action 4 (pick glass with yellowish liquid)
    (4, {'holding': (), 
         'collision_free': (), 
         'timeout': (), 
         'check_motion_health': ()}, 
        (True, '', True, True)),
    
    # After action 5 (drop glass in the trash can)
    (5, {'at_location': ('glass with yellowish liquid', 'large red trash can'), 
         'collision_free': (), 
         'timeout': (), 
         'check_motion_health': ()}, 
        (True, '', True, True))
]
